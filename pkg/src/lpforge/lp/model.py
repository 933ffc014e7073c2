"""Immutable value types for linear and mixed-integer models."""

from __future__ import annotations

import math
from fractions import Fraction
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple

from lpforge.errors import LPForgeError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

LE, GE, EQ = "<=", ">=", "="
SENSES = (LE, GE, EQ)

CONTINUOUS, INTEGER, BINARY = "continuous", "integer", "binary"

INF = math.inf

# names the LP dialect reserves for section headers and bound keywords
RESERVED = frozenset(
    {
        "minimize", "maximize", "minimise", "maximise", "minimum", "maximum", "min", "max",
        "subject", "st", "bounds", "bound", "general", "generals", "gen", "int", "integer",
        "integers", "binary", "binaries", "bin", "end", "free", "inf", "infinity",
    }
)


def is_identifier(name: str) -> bool:
    return bool(IDENT_RE.match(name)) and name.lower() not in RESERVED


def _check_name(name: str, what: str) -> None:
    if not is_identifier(name):
        raise LPForgeError("INVALID_NAME", f"{what} name {name!r} is not a legal identifier")


@dataclass(frozen=True)
class Term:
    coef: float
    var: str


@dataclass(frozen=True)
class LinearExpression:
    """Sum of coefficient/variable terms, variables distinct, first-appearance order."""

    terms: Tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        merged: Dict[str, float] = {}
        for t in self.terms:
            c = float(t.coef)
            if not math.isfinite(c):
                raise LPForgeError("NONFINITE_COEFFICIENT", f"coefficient of {t.var} is {c}")
            _check_name(t.var, "variable")
            merged[t.var] = merged.get(t.var, 0.0) + c
        object.__setattr__(self, "terms", tuple(Term(c + 0.0, v) for v, c in merged.items()))

    @classmethod
    def of(cls, *pairs: Tuple[float, str]) -> "LinearExpression":
        return cls(tuple(Term(c, v) for c, v in pairs))

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(t.var for t in self.terms)

    def coefficient(self, var: str) -> float:
        for t in self.terms:
            if t.var == var:
                return t.coef
        return 0.0

    def without(self, names: Iterable[str]) -> "LinearExpression":
        drop = set(names)
        return LinearExpression(tuple(t for t in self.terms if t.var not in drop))

    def rename(self, mapping: Mapping[str, str]) -> "LinearExpression":
        return LinearExpression(tuple(Term(t.coef, mapping.get(t.var, t.var)) for t in self.terms))

    def evaluate(self, values: Mapping[str, float]):
        return sum((t.coef * values.get(t.var, 0) for t in self.terms), 0)


@dataclass(frozen=True)
class NamedConstraint:
    name: str
    expression: LinearExpression
    sense: str
    rhs: float
    # comment-header family the row was emitted under; "" for original rows
    group: str = ""

    def __post_init__(self) -> None:
        _check_name(self.name, "constraint")
        if self.sense not in SENSES:
            raise LPForgeError("INVALID_SENSE", f"constraint {self.name}: sense {self.sense!r}")
        if len(self.expression) == 0:
            raise LPForgeError("EMPTY_CONSTRAINT", f"constraint {self.name} has no terms")
        rhs = float(self.rhs)
        if not math.isfinite(rhs):
            raise LPForgeError("NONFINITE_COEFFICIENT", f"constraint {self.name}: rhs {rhs}")
        object.__setattr__(self, "rhs", rhs + 0.0)


@dataclass(frozen=True)
class Bound:
    lower: float = 0.0
    upper: float = INF

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise LPForgeError("NONFINITE_COEFFICIENT", "NaN bound")
        object.__setattr__(self, "lower", float(self.lower) + 0.0)
        object.__setattr__(self, "upper", float(self.upper) + 0.0)


DEFAULT_BOUND = Bound()
BINARY_BOUND = Bound(0.0, 1.0)


@dataclass(frozen=True)
class Model:
    """A complete LP-format optimization problem.

    ``bounds`` holds only explicitly declared bound entries and
    ``integrality`` only integer/binary variables; everything else takes the
    LP-format defaults (continuous, ``0 <= v <= +inf``). Use
    :meth:`bound_of` for the effective bound of a variable.
    """

    sense: str = MINIMIZE
    objective_name: str = "obj"
    objective: LinearExpression = field(default_factory=LinearExpression)
    constraints: Tuple[NamedConstraint, ...] = ()
    bounds: Mapping[str, Bound] = field(default_factory=dict)
    integrality: Mapping[str, str] = field(default_factory=dict)
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.sense not in (MINIMIZE, MAXIMIZE):
            raise LPForgeError("INVALID_SENSE", f"objective sense {self.sense!r}")
        _check_name(self.objective_name, "objective")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        seen = set()
        for c in self.constraints:
            if c.name in seen:
                raise LPForgeError("DUPLICATE_NAME", f"constraint {c.name} declared twice")
            seen.add(c.name)
        for v in self.bounds:
            _check_name(v, "variable")
        integrality = {}
        for v, kind in self.integrality.items():
            _check_name(v, "variable")
            if kind not in (CONTINUOUS, INTEGER, BINARY):
                raise LPForgeError("INVALID_INTEGRALITY", f"{v}: {kind!r}")
            if kind != CONTINUOUS:
                integrality[v] = kind
        object.__setattr__(self, "bounds", dict(self.bounds))
        object.__setattr__(self, "integrality", integrality)
        metadata = {}
        for k, v in self.metadata.items():
            key = str(k)
            if not key or any(ch.isspace() for ch in key) or "=" in key:
                raise LPForgeError("INVALID_NAME", f"metadata key {key!r}")
            metadata[key] = " ".join(str(v).split())
        object.__setattr__(self, "metadata", metadata)

    # -- derived views -------------------------------------------------

    @property
    def variables(self) -> Tuple[str, ...]:
        """All variables, in first-appearance order (objective, rows, bounds, integrality)."""
        order: Dict[str, None] = {}
        for t in self.objective:
            order.setdefault(t.var)
        for c in self.constraints:
            for t in c.expression:
                order.setdefault(t.var)
        for v in self.bounds:
            order.setdefault(v)
        for v in self.integrality:
            order.setdefault(v)
        return tuple(order)

    def kind_of(self, var: str) -> str:
        return self.integrality.get(var, CONTINUOUS)

    def bound_of(self, var: str) -> Bound:
        b = self.bounds.get(var)
        if self.kind_of(var) == BINARY:
            if b is None:
                return BINARY_BOUND
            return Bound(max(b.lower, 0.0), min(b.upper, 1.0))
        return b if b is not None else DEFAULT_BOUND

    def constraint(self, name: str) -> NamedConstraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def constraint_names(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.constraints)

    def with_changes(self, **changes) -> "Model":
        return replace(self, **changes)


def variable_stem(name: str) -> str:
    """Leading name segment before the first index separator (``x_1_m1_2`` -> ``x``)."""
    return name.split("_", 1)[0] or name


def group_by_family(constraints: Sequence[NamedConstraint]) -> List[Tuple[str, List[NamedConstraint]]]:
    out: List[Tuple[str, List[NamedConstraint]]] = []
    for c in constraints:
        if not out or out[-1][0] != c.group:
            out.append((c.group, []))
        out[-1][1].append(c)
    return out


def parse_pairs(text: str) -> Dict[str, str]:
    """Parse ``k1:v1,k2:v2`` metadata values."""
    out: Dict[str, str] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        k, _, v = part.partition(":")
        out[k.strip()] = v.strip()
    return out


def format_pairs(mapping: Mapping[str, object]) -> str:
    return ",".join(f"{k}:{v}" for k, v in mapping.items())



def exact(value: float) -> Fraction:
    """Decimal-exact rational for a model coefficient (``0.1`` -> ``1/10``)."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(repr(float(value)))
