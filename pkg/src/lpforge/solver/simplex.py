"""Bounded-variable primal simplex, exact (Fraction) or floating point.

The LP handled here is::

    min  c.x   s.t.  rows (<=, >=, =),  lo <= x <= up

with ``lo``/``up`` possibly infinite. Variables are shifted/split into
columns ``0 <= y <= u`` and a two-phase tableau method with Bland's rule is
run on the result. Upper bounds are handled implicitly (bound flips), so
binary variables and branching bounds never add rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

INF = math.inf

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"


@dataclass
class LinearProblem:
    """Minimization data in column form; rows are ``({col: coef}, sense, rhs)``."""

    names: List[str]
    cost: List[Fraction]
    rows: List[Tuple[Dict[int, Fraction], str, Fraction]]
    lower: List[object]  # Fraction or -inf
    upper: List[object]  # Fraction or +inf
    integer: List[bool] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.rows) * (len(self.names) + len(self.rows))


@dataclass
class LPResult:
    status: str
    x: Optional[List[object]] = None
    objective: Optional[object] = None
    iterations: int = 0


class _Tableau:
    def __init__(self, exact: bool, max_iter: int):
        self.exact = exact
        self.eps = 0 if exact else 1e-9
        self.zero = Fraction(0) if exact else 0.0
        self.max_iter = max_iter
        self.iterations = 0

    def num(self, v):
        return v if self.exact else float(v)


def solve_lp(
    problem: LinearProblem,
    lower: Optional[Sequence[object]] = None,
    upper: Optional[Sequence[object]] = None,
    exact: bool = True,
    max_iter: int = 200_000,
) -> LPResult:
    """Solve the LP relaxation of ``problem`` under the given variable bounds."""
    lower = problem.lower if lower is None else lower
    upper = problem.upper if upper is None else upper
    tb = _Tableau(exact, max_iter)
    num = tb.num
    n = len(problem.names)

    for j in range(n):
        if lower[j] != -INF and upper[j] != INF and lower[j] > upper[j]:
            return LPResult(INFEASIBLE)

    # x_j = const_j + sum(sign * y_col)
    const: List[object] = [tb.zero] * n
    cols_of: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
    ucol: List[object] = []
    for j in range(n):
        lo, up = lower[j], upper[j]
        if lo != -INF and up != INF and lo == up:
            const[j] = num(lo)
        elif lo != -INF:
            const[j] = num(lo)
            cols_of[j].append((len(ucol), 1))
            ucol.append(INF if up == INF else num(up - lo))
        elif up != INF:
            const[j] = num(up)
            cols_of[j].append((len(ucol), -1))
            ucol.append(INF)
        else:
            cols_of[j].append((len(ucol), 1))
            ucol.append(INF)
            cols_of[j].append((len(ucol), -1))
            ucol.append(INF)
    n_struct = len(ucol)

    rows: List[Dict[int, object]] = []
    rhs: List[object] = []
    slack_sign: List[int] = []
    for coefs, sense, b in problem.rows:
        r: Dict[int, object] = {}
        bb = num(b)
        for j, a in coefs.items():
            a = num(a)
            if a == 0:
                continue
            bb -= a * const[j]
            for col, sgn in cols_of[j]:
                r[col] = r.get(col, tb.zero) + (a if sgn > 0 else -a)
        rows.append(r)
        rhs.append(bb)
        slack_sign.append(1 if sense == "<=" else (-1 if sense == ">=" else 0))

    # rows with no columns left: check them directly
    keep = []
    for i, r in enumerate(rows):
        r = {k: v for k, v in r.items() if v != 0}
        rows[i] = r
        if r:
            keep.append(i)
            continue
        s, b = slack_sign[i], rhs[i]
        ok = (b >= -tb.eps) if s == 1 else (b <= tb.eps) if s == -1 else (abs(b) <= tb.eps)
        if not ok:
            return LPResult(INFEASIBLE)
    rows = [rows[i] for i in keep]
    rhs = [rhs[i] for i in keep]
    slack_sign = [slack_sign[i] for i in keep]
    m = len(rows)

    cost_y: List[object] = [tb.zero] * n_struct
    for j in range(n):
        c = num(problem.cost[j])
        for col, sgn in cols_of[j]:
            cost_y[col] = c if sgn > 0 else -c

    # slacks, sign normalization, initial basis
    ncol = n_struct
    basis: List[int] = []
    n_art_start = None
    art_rows: List[int] = []
    for i in range(m):
        s = slack_sign[i]
        if s != 0:
            rows[i][ncol] = num(s)
            ucol.append(INF)
            cost_y.append(tb.zero)
            slack_col = ncol
            ncol += 1
        else:
            slack_col = None
        if rhs[i] < 0:
            rows[i] = {k: -v for k, v in rows[i].items()}
            rhs[i] = -rhs[i]
        if slack_col is not None and rows[i][slack_col] > 0:
            basis.append(slack_col)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art_start = ncol
    for i in art_rows:
        rows[i][ncol] = num(1)
        ucol.append(INF)
        cost_y.append(tb.zero)
        basis[i] = ncol
        ncol += 1

    T = [[tb.zero] * ncol for _ in range(m)]
    for i, r in enumerate(rows):
        for k, v in r.items():
            T[i][k] = v
    beta = list(rhs)
    at_upper = [False] * ncol
    is_basic = [False] * ncol
    for b in basis:
        is_basic[b] = True

    def reduced_costs(c: List[object]) -> List[object]:
        d = list(c)
        for i in range(m):
            cb = c[basis[i]]
            if cb != 0:
                Ti = T[i]
                for k in range(ncol):
                    if Ti[k] != 0:
                        d[k] -= cb * Ti[k]
        return d

    def run(c: List[object], allowed: int) -> str:
        d = reduced_costs(c)
        eps = tb.eps
        while True:
            enter = -1
            for k in range(allowed):
                if is_basic[k]:
                    continue
                dk = d[k]
                if (not at_upper[k] and dk < -eps) or (at_upper[k] and dk > eps):
                    enter = k
                    break
            if enter < 0:
                return OPTIMAL
            if tb.iterations >= tb.max_iter:
                return ITERATION_LIMIT
            tb.iterations += 1
            delta = -1 if at_upper[enter] else 1
            theta = ucol[enter]
            leave_row = -1
            leave_to_upper = False
            for i in range(m):
                a = T[i][enter]
                if a == 0 or (not tb.exact and abs(a) <= 1e-12):
                    continue
                rate = -delta * a  # change of basic value per unit step
                bv = basis[i]
                if rate < 0:
                    t = beta[i] / -rate
                    to_upper = False
                else:
                    if ucol[bv] == INF:
                        continue
                    t = (ucol[bv] - beta[i]) / rate
                    to_upper = True
                if t < 0:
                    t = tb.zero
                if t < theta or (t == theta and leave_row >= 0 and bv < basis[leave_row]):
                    theta, leave_row, leave_to_upper = t, i, to_upper
            if theta == INF:
                return UNBOUNDED
            for i in range(m):
                a = T[i][enter]
                if a != 0:
                    beta[i] -= delta * theta * a
            if leave_row < 0:
                at_upper[enter] = not at_upper[enter]
                continue
            new_val = (ucol[enter] if at_upper[enter] else tb.zero) + delta * theta
            old = basis[leave_row]
            is_basic[old] = False
            at_upper[old] = leave_to_upper
            basis[leave_row] = enter
            is_basic[enter] = True
            at_upper[enter] = False
            beta[leave_row] = new_val
            _pivot(T, d, leave_row, enter, tb.exact)

    def _pivot_only(r: int, k: int) -> None:
        dummy = [tb.zero] * ncol
        _pivot(T, dummy, r, k, tb.exact)

    if art_rows:
        c1 = [tb.zero] * ncol
        for k in range(n_art_start, ncol):
            c1[k] = num(1)
        status = run(c1, ncol)
        if status == ITERATION_LIMIT:
            return LPResult(ITERATION_LIMIT, iterations=tb.iterations)
        infeas = sum((beta[i] for i in range(m) if basis[i] >= n_art_start), tb.zero)
        if infeas > (tb.eps * 10 if not tb.exact else 0):
            return LPResult(INFEASIBLE, iterations=tb.iterations)
        # drive remaining artificials out of the basis
        drop_rows = []
        for i in range(m):
            if basis[i] < n_art_start:
                continue
            piv = next(
                (k for k in range(n_art_start) if not is_basic[k] and T[i][k] != 0 and (tb.exact or abs(T[i][k]) > 1e-9)),
                -1,
            )
            if piv < 0:
                drop_rows.append(i)
                continue
            val = ucol[piv] if at_upper[piv] else tb.zero
            is_basic[basis[i]] = False
            basis[i] = piv
            is_basic[piv] = True
            at_upper[piv] = False
            beta[i] = val
            _pivot_only(i, piv)
        if drop_rows:
            keep_rows = [i for i in range(m) if i not in set(drop_rows)]
            for i in drop_rows:
                is_basic[basis[i]] = False
            T[:] = [T[i] for i in keep_rows]
            beta[:] = [beta[i] for i in keep_rows]
            basis[:] = [basis[i] for i in keep_rows]
            m = len(keep_rows)
        for k in range(n_art_start, ncol):
            ucol[k] = tb.zero
    status = run(cost_y, n_art_start)
    if status != OPTIMAL:
        return LPResult(status, iterations=tb.iterations)

    y: List[object] = [tb.zero] * ncol
    for k in range(ncol):
        if at_upper[k]:
            y[k] = ucol[k]
    for i in range(m):
        y[basis[i]] = beta[i]
    x = []
    for j in range(n):
        v = const[j]
        for col, sgn in cols_of[j]:
            v = v + y[col] if sgn > 0 else v - y[col]
        x.append(v)
    obj = sum((num(problem.cost[j]) * x[j] for j in range(n)), tb.zero)
    return LPResult(OPTIMAL, x, obj, tb.iterations)


def _pivot(T: List[List[object]], d: List[object], r: int, k: int, exact: bool) -> None:
    row = T[r]
    p = row[k]
    if p != 1:
        inv = 1 / p
        for c in range(len(row)):
            if row[c] != 0:
                row[c] *= inv
    nz = [(c, row[c]) for c in range(len(row)) if row[c] != 0]
    for i, Ti in enumerate(T):
        if i == r:
            continue
        f = Ti[k]
        if f == 0:
            continue
        for c, v in nz:
            Ti[c] -= f * v
        Ti[k] = 0 if exact else 0.0
    f = d[k]
    if f != 0:
        for c, v in nz:
            d[c] -= f * v
        d[k] = 0 if exact else 0.0
