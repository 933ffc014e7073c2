"""LP-format model core: types, parser, writer, validation, diff."""

from lpforge.lp.diff import StructuralDiff, diff_models
from lpforge.lp.model import (
    BINARY,
    CONTINUOUS,
    EQ,
    GE,
    INTEGER,
    LE,
    MAXIMIZE,
    MINIMIZE,
    Bound,
    LinearExpression,
    Model,
    NamedConstraint,
    Term,
)
from lpforge.lp.parser import parse_lp, parse_lp_diagnostics
from lpforge.lp.propagate import propagate_bounds
from lpforge.lp.validate import validate
from lpforge.lp.writer import serialize_lp

__all__ = [
    "BINARY", "CONTINUOUS", "EQ", "GE", "INTEGER", "LE", "MAXIMIZE", "MINIMIZE",
    "Bound", "LinearExpression", "Model", "NamedConstraint", "StructuralDiff", "Term",
    "diff_models", "parse_lp", "parse_lp_diagnostics", "propagate_bounds", "serialize_lp", "validate",
]
