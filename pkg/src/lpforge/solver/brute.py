"""Exhaustive enumeration of the integer lattice; an independent check on branch and bound."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import List, Optional

import numpy as np

from lpforge.errors import LPForgeError
from lpforge.lp.model import Model
from lpforge.solver.core import SolveConfig, Solution, compile_model
from lpforge.solver.simplex import INF, INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProblem, solve_lp

_INT64_SAFE = 2**62


def _lcm_den(values) -> int:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return den


def brute_force_solve(model: Model, cfg: SolveConfig = SolveConfig()) -> Solution:
    """Enumerate every integer assignment within bounds.

    Continuous variables are optimized by one LP per lattice point. Raises
    ``LATTICE_TOO_LARGE`` when an integer variable is unbounded or the
    lattice exceeds ``cfg.lattice_cap`` points.
    """
    problem, sign = compile_model(model)
    int_cols = [j for j, f in enumerate(problem.integer) if f]
    cont_cols = [j for j, f in enumerate(problem.integer) if not f]
    ranges = []
    size = 1
    for j in int_cols:
        lo, up = problem.lower[j], problem.upper[j]
        if lo == -INF or up == INF:
            raise LPForgeError("LATTICE_TOO_LARGE", f"integer variable {problem.names[j]} is unbounded")
        if lo > up:
            return Solution(INFEASIBLE, stats={"lattice_points": 0})
        ranges.append(range(int(lo), int(up) + 1))
        size *= len(ranges[-1])
        if size > cfg.lattice_cap:
            raise LPForgeError("LATTICE_TOO_LARGE", f"integer lattice exceeds {cfg.lattice_cap} points")
    stats = {"lattice_points": size}
    if not cont_cols:
        x = _enumerate_pure(problem, int_cols, ranges)
        if x is None:
            return Solution(INFEASIBLE, stats=stats)
        obj = sum((problem.cost[j] * x[j] for j in range(len(x))), Fraction(0))
        return Solution(OPTIMAL, sign * obj, dict(zip(problem.names, x)), stats)

    best_x: Optional[List[object]] = None
    best_obj = None
    for point in itertools.product(*ranges):
        lo = list(problem.lower)
        up = list(problem.upper)
        for j, v in zip(int_cols, point):
            lo[j] = up[j] = Fraction(v)
        res = solve_lp(problem, lo, up, exact=True)
        if res.status == UNBOUNDED:
            return Solution(UNBOUNDED, stats=stats)
        if res.status != OPTIMAL:
            continue
        if best_obj is None or res.objective < best_obj:
            best_x, best_obj = res.x, res.objective
    if best_x is None:
        return Solution(INFEASIBLE, stats=stats)
    return Solution(OPTIMAL, sign * best_obj, dict(zip(problem.names, best_x)), stats)


def _enumerate_pure(problem: LinearProblem, int_cols: List[int], ranges: List[range]) -> Optional[List[Fraction]]:
    """Best lattice point of an all-integer problem, first in lexicographic order on ties."""
    n = len(problem.names)
    if n == 0:
        ok = all(_row_ok(Fraction(0), s, b) for _, s, b in problem.rows)
        return [] if ok else None
    # scale every row and the objective to integers so numpy evaluation is exact
    A, b, senses = [], [], []
    for coefs, s, rhs in problem.rows:
        den = _lcm_den(list(coefs.values()) + [rhs])
        A.append([int(coefs.get(j, 0) * den) for j in range(n)])
        b.append(int(rhs * den))
        senses.append(s)
    cden = _lcm_den(problem.cost)
    c = [int(v * cden) for v in problem.cost]
    vmax = max((max(abs(r.start), abs(r.stop - 1)) for r in ranges), default=0)
    amax = max([abs(v) for row in A for v in row] + [abs(v) for v in c] + [1])
    if amax * max(vmax, 1) * n < _INT64_SAFE and max([abs(v) for v in b] + [0]) < _INT64_SAFE:
        return _enumerate_numpy(A, b, senses, c, ranges)
    best, best_obj = None, None
    for point in itertools.product(*ranges):
        if all(_row_ok(sum(a * p for a, p in zip(row, point)), s, rhs) for row, s, rhs in zip(A, senses, b)):
            obj = sum(ci * p for ci, p in zip(c, point))
            if best_obj is None or obj < best_obj:
                best, best_obj = point, obj
    return None if best is None else [Fraction(v) for v in best]


def _enumerate_numpy(A, b, senses, c, ranges) -> Optional[List[Fraction]]:
    grids = np.meshgrid(*[np.arange(r.start, r.stop, dtype=np.int64) for r in ranges], indexing="ij")
    P = np.stack([g.reshape(-1) for g in grids], axis=1)
    feasible = np.ones(P.shape[0], dtype=bool)
    if A:
        act = P @ np.array(A, dtype=np.int64).T
        rhs = np.array(b, dtype=np.int64)
        for i, s in enumerate(senses):
            if s == "<=":
                feasible &= act[:, i] <= rhs[i]
            elif s == ">=":
                feasible &= act[:, i] >= rhs[i]
            else:
                feasible &= act[:, i] == rhs[i]
    if not feasible.any():
        return None
    obj = P @ np.array(c, dtype=np.int64)
    idx = np.flatnonzero(feasible)
    k = idx[np.argmin(obj[idx])]  # argmin returns the first minimum
    return [Fraction(int(v)) for v in P[k]]


def _row_ok(lhs, sense, rhs) -> bool:
    if sense == "<=":
        return lhs <= rhs
    if sense == ">=":
        return lhs >= rhs
    return lhs == rhs
