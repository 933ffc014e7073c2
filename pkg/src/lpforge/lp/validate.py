"""Solver-readiness checks for a parsed model."""

from __future__ import annotations

from collections import Counter
from typing import List

from lpforge.errors import Diagnostic, error, warning
from lpforge.lp.model import BINARY, Model


def validate(model: Model) -> List[Diagnostic]:
    """Return findings for ``model``; no error-severity finding means solver-ready."""
    out: List[Diagnostic] = []
    for c in model.constraints:
        if len(c.expression) == 0:
            out.append(error("EMPTY_CONSTRAINT", f"constraint {c.name} has no terms"))
    for v, b in model.bounds.items():
        if model.kind_of(v) == BINARY and (b.lower < 0 or b.upper > 1 or b.lower > 1 or b.upper < 0):
            out.append(warning("BOUND_CONFLICT_BINARY", f"binary {v} has bounds [{b.lower}, {b.upper}] outside [0, 1]"))
    for v in model.variables:
        b = model.bound_of(v)
        if b.lower > b.upper:
            out.append(warning("BOUND_INVERTED", f"{v} has lower bound {b.lower} above upper bound {b.upper}"))
    uses = Counter(t.var for c in model.constraints for t in c.expression)
    in_objective = set(model.objective.variables)
    for v, n in uses.items():
        if n == 1 and v not in in_objective and v not in model.bounds and v not in model.integrality:
            out.append(warning("UNDECLARED_VARIABLE", f"{v} appears in a single row only; default bounds 0 <= {v} <= inf apply"))
    return out
