"""Activity-based bound propagation over linear rows (exact arithmetic)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple, Union

from lpforge.lp.model import EQ, GE, LE, Model, exact

Num = Union[Fraction, float]  # float only for +-inf
INF = math.inf


@dataclass
class Propagation:
    lower: Dict[str, Num]
    upper: Dict[str, Num]
    infeasible: bool
    rounds: int

    def fixed_zero(self) -> List[str]:
        return [v for v in self.lower if self.lower[v] == 0 and self.upper[v] == 0]


def _rows(model: Model) -> List[Tuple[List[Tuple[Fraction, str]], Fraction]]:
    """Every row as ``sum(a*x) <= b`` (equalities and >= rows are split/negated)."""
    out = []
    for c in model.constraints:
        terms = [(exact(t.coef), t.var) for t in c.expression if t.coef != 0]
        rhs = exact(c.rhs)
        if c.sense in (LE, EQ):
            out.append((terms, rhs))
        if c.sense in (GE, EQ):
            out.append(([(-a, v) for a, v in terms], -rhs))
    return out


def propagate_bounds(model: Model, max_rounds: int = 50) -> Propagation:
    """Tighten variable bounds to a fixpoint (or ``max_rounds`` sweeps).

    Every derived bound is implied by the rows and declared bounds, so the
    result is valid for every feasible point of ``model``.
    """
    lower: Dict[str, Num] = {}
    upper: Dict[str, Num] = {}
    integral = {v for v in model.variables if model.kind_of(v) != "continuous"}
    for v in model.variables:
        b = model.bound_of(v)
        lower[v] = -INF if b.lower == -INF else exact(b.lower)
        upper[v] = INF if b.upper == INF else exact(b.upper)
        if v in integral:
            if lower[v] != -INF:
                lower[v] = Fraction(math.ceil(lower[v]))
            if upper[v] != INF:
                upper[v] = Fraction(math.floor(upper[v]))
    rows = _rows(model)
    rounds = 0
    changed = True
    while changed and rounds < max_rounds:
        changed = False
        rounds += 1
        for terms, rhs in rows:
            # minimum activity of a*x, tracked as finite part plus count of -inf contributions
            fin = Fraction(0)
            n_inf = 0
            contrib = []
            for a, v in terms:
                bnd = lower[v] if a > 0 else upper[v]
                if bnd in (INF, -INF):
                    n_inf += 1
                    contrib.append(None)
                else:
                    c = a * bnd
                    fin += c
                    contrib.append(c)
            if n_inf == 0 and fin > rhs:
                return Propagation(lower, upper, True, rounds)
            for (a, v), c in zip(terms, contrib):
                if c is None:
                    if n_inf > 1:
                        continue
                    residual = fin
                else:
                    if n_inf > 0:
                        continue
                    residual = fin - c
                limit = (rhs - residual) / a
                if a > 0:
                    if v in integral:
                        limit = Fraction(math.floor(limit))
                    if limit < upper[v]:
                        upper[v] = limit
                        changed = True
                else:
                    if v in integral:
                        limit = Fraction(math.ceil(limit))
                    if limit > lower[v]:
                        lower[v] = limit
                        changed = True
                if lower[v] > upper[v]:
                    return Propagation(lower, upper, True, rounds)
    return Propagation(lower, upper, False, rounds)
