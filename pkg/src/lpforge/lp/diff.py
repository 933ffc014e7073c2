"""Structural comparison of two models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from lpforge.lp.model import Model


@dataclass(frozen=True)
class StructuralDiff:
    added_constraints: Tuple[str, ...] = ()
    removed_constraints: Tuple[str, ...] = ()
    modified_constraints: Tuple[str, ...] = ()
    added_variables: Tuple[str, ...] = ()
    removed_variables: Tuple[str, ...] = ()
    # existing variables whose bounds or integrality changed
    modified_variables: Tuple[str, ...] = ()
    objective_changed: bool = False

    @property
    def is_empty(self) -> bool:
        return not (
            self.added_constraints or self.removed_constraints or self.modified_constraints
            or self.added_variables or self.removed_variables or self.modified_variables
            or self.objective_changed
        )

    @property
    def additions_only(self) -> bool:
        return not (
            self.removed_constraints or self.modified_constraints or self.removed_variables
            or self.modified_variables or self.objective_changed
        )


def diff_models(a: Model, b: Model) -> StructuralDiff:
    """Compare constraints by name, variables by name, and the objective exactly."""
    rows_a = {c.name: c for c in a.constraints}
    rows_b = {c.name: c for c in b.constraints}
    modified = tuple(
        n for n in rows_a
        if n in rows_b
        and (rows_a[n].expression, rows_a[n].sense, rows_a[n].rhs) != (rows_b[n].expression, rows_b[n].sense, rows_b[n].rhs)
    )
    vars_a, vars_b = a.variables, b.variables
    set_a, set_b = set(vars_a), set(vars_b)
    changed_vars = tuple(
        v for v in vars_a
        if v in set_b and (a.bound_of(v) != b.bound_of(v) or a.kind_of(v) != b.kind_of(v))
    )
    return StructuralDiff(
        added_constraints=tuple(n for n in rows_b if n not in rows_a),
        removed_constraints=tuple(n for n in rows_a if n not in rows_b),
        modified_constraints=modified,
        added_variables=tuple(v for v in vars_b if v not in set_a),
        removed_variables=tuple(v for v in vars_a if v not in set_b),
        modified_variables=changed_vars,
        objective_changed=(a.sense, a.objective_name, a.objective) != (b.sense, b.objective_name, b.objective),
    )
