"""Branch-and-bound MILP solving over the exact simplex relaxation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from lpforge.errors import Diagnostic, LPForgeError, warning
from lpforge.lp.model import GE, LE, MAXIMIZE, Model, exact
from lpforge.solver.simplex import (
    INF,
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LinearProblem,
    solve_lp,
)

__all__ = [
    "INFEASIBLE", "ITERATION_LIMIT", "OPTIMAL", "UNBOUNDED",
    "SolveConfig", "Solution", "Violation", "compile_model", "solve", "solve_problem", "check_assignment",
]


@dataclass(frozen=True)
class SolveConfig:
    feasibility_tol: float = 1e-6
    integrality_tol: float = 1e-6
    node_limit: int = 1_000_000
    objective_equality_tol: float = 1e-6  # relative
    # tableau entries (rows x columns) above which floating arithmetic is used
    exact_size_limit: int = 60_000
    lattice_cap: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("feasibility_tol", "integrality_tol", "objective_equality_tol"):
            if not getattr(self, name) > 0:
                raise LPForgeError("INVALID_CONFIG", f"{name} must be positive")

    def objectives_equal(self, a, b) -> bool:
        a, b = float(a), float(b)
        return abs(a - b) <= self.objective_equality_tol * max(1.0, abs(a), abs(b))


@dataclass
class Solution:
    status: str
    objective: Optional[object] = None
    assignment: Dict[str, object] = field(default_factory=dict)
    stats: Dict[str, object] = field(default_factory=dict)
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True)
class Violation:
    kind: str  # "row" | "bound" | "integrality"
    name: str
    magnitude: float


def compile_model(model: Model) -> Tuple[LinearProblem, int]:
    """Column form of ``model`` in minimization orientation; returns (problem, objective sign)."""
    names = list(model.variables)
    index = {v: j for j, v in enumerate(names)}
    sign = -1 if model.sense == MAXIMIZE else 1
    cost = [Fraction(0)] * len(names)
    for t in model.objective:
        cost[index[t.var]] += sign * exact(t.coef)
    rows = []
    for c in model.constraints:
        coefs: Dict[int, Fraction] = {}
        for t in c.expression:
            coefs[index[t.var]] = coefs.get(index[t.var], Fraction(0)) + exact(t.coef)
        rows.append((coefs, c.sense, exact(c.rhs)))
    lower: List[object] = []
    upper: List[object] = []
    integer: List[bool] = []
    for v in names:
        b = model.bound_of(v)
        is_int = model.kind_of(v) != "continuous"
        lo = -INF if b.lower == -INF else exact(b.lower)
        up = INF if b.upper == INF else exact(b.upper)
        if is_int:
            lo = lo if lo == -INF else Fraction(math.ceil(lo))
            up = up if up == INF else Fraction(math.floor(up))
        lower.append(lo)
        upper.append(up)
        integer.append(is_int)
    return LinearProblem(names, cost, rows, lower, upper, integer), sign


def _fractionality(v) -> object:
    return v - math.floor(v)


def solve_problem(problem: LinearProblem, cfg: SolveConfig = SolveConfig()) -> Tuple[str, Optional[List[object]], Optional[object], Dict[str, object]]:
    """Branch and bound on a compiled minimization problem.

    Depth-first, down branch first; branches on the most fractional integer
    variable, ties broken by variable name.
    """
    use_exact = problem.size <= cfg.exact_size_limit
    itol = 0 if use_exact else cfg.integrality_tol
    stats: Dict[str, object] = {"nodes": 0, "simplex_iterations": 0, "arithmetic": "exact" if use_exact else "float"}
    int_cols = [j for j, f in enumerate(problem.integer) if f]
    order = sorted(int_cols, key=lambda j: problem.names[j])
    stack = [(list(problem.lower), list(problem.upper))]
    best_x: Optional[List[object]] = None
    best_obj: Optional[object] = None
    root = True
    while stack:
        if stats["nodes"] >= cfg.node_limit:
            stats["root_bound"] = stats.get("root_bound")
            return ITERATION_LIMIT, best_x, best_obj, stats
        lo, up = stack.pop()
        stats["nodes"] += 1
        res = solve_lp(problem, lo, up, exact=use_exact)
        stats["simplex_iterations"] += res.iterations
        if res.status == ITERATION_LIMIT:
            return ITERATION_LIMIT, best_x, best_obj, stats
        if root:
            root = False
            if res.status == UNBOUNDED:
                return UNBOUNDED, None, None, stats
            if res.status == INFEASIBLE:
                return INFEASIBLE, None, None, stats
            stats["root_bound"] = res.objective
        if res.status != OPTIMAL:
            if res.status == UNBOUNDED:
                return UNBOUNDED, None, None, stats
            continue
        if best_obj is not None:
            cutoff = best_obj if use_exact else best_obj - cfg.objective_equality_tol * max(1.0, abs(best_obj))
            if res.objective >= cutoff:
                continue
        x = res.x
        branch_j = -1
        branch_score = None
        for j in order:
            f = _fractionality(x[j])
            score = min(f, 1 - f)
            if score <= itol:
                continue
            if branch_score is None or score > branch_score:
                branch_j, branch_score = j, score
        if branch_j < 0:
            if not use_exact:
                x = list(x)
                for j in int_cols:
                    x[j] = float(round(x[j]))
            best_x, best_obj = x, res.objective
            continue
        v = x[branch_j]
        down_up = list(up)
        down_up[branch_j] = Fraction(math.floor(v))
        up_lo = list(lo)
        up_lo[branch_j] = Fraction(math.ceil(v))
        stack.append((up_lo, list(up)))
        stack.append((list(lo), down_up))
    if best_x is None:
        return INFEASIBLE, None, None, stats
    return OPTIMAL, best_x, best_obj, stats


def solve(model: Model, cfg: SolveConfig = SolveConfig()) -> Solution:
    """Solve ``model`` to global optimality (or report Infeasible/Unbounded/IterationLimit)."""
    problem, sign = compile_model(model)
    status, x, obj, stats = solve_problem(problem, cfg)
    if stats.get("root_bound") is not None:
        stats["root_bound"] = sign * stats["root_bound"]
    diags: Tuple[Diagnostic, ...] = ()
    if status == ITERATION_LIMIT:
        diags = (warning("NODE_LIMIT", f"search stopped after {stats['nodes']} nodes"),)
    if status != OPTIMAL:
        return Solution(status, None, {}, stats, diags)
    assignment = dict(zip(problem.names, x))
    return Solution(OPTIMAL, sign * obj, assignment, stats, diags)


def check_assignment(model: Model, assignment: Mapping[str, object], cfg: SolveConfig = SolveConfig()) -> List[Violation]:
    """Every row, bound and integrality requirement violated by ``assignment``."""
    out: List[Violation] = []
    ftol = cfg.feasibility_tol
    val = {v: assignment.get(v, 0) for v in model.variables}
    for c in model.constraints:
        lhs = sum((exact(t.coef) * _as_exact(val[t.var]) for t in c.expression), Fraction(0))
        rhs = exact(c.rhs)
        if c.sense == LE:
            excess = lhs - rhs
        elif c.sense == GE:
            excess = rhs - lhs
        else:
            excess = abs(lhs - rhs)
        if excess > ftol:
            out.append(Violation("row", c.name, float(excess)))
    for v in model.variables:
        b = model.bound_of(v)
        x = _as_exact(val[v])
        if b.lower != -INF and x < exact(b.lower) - Fraction(ftol):
            out.append(Violation("bound", v, float(exact(b.lower) - x)))
        if b.upper != INF and x > exact(b.upper) + Fraction(ftol):
            out.append(Violation("bound", v, float(x - exact(b.upper))))
        if model.kind_of(v) != "continuous":
            gap = abs(x - round(x))
            if gap > cfg.integrality_tol:
                out.append(Violation("integrality", v, float(gap)))
    return out


def _as_exact(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(float(v))
