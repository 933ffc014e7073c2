"""Deterministic LP text serialization."""

from __future__ import annotations

from typing import List

from lpforge.lp.model import (
    BINARY,
    INF,
    INTEGER,
    MAXIMIZE,
    Bound,
    LinearExpression,
    Model,
    group_by_family,
)

BASE_GROUP_HEADER = "(base)"


def format_number(value: float) -> str:
    """Shortest decimal that parses back to the same float."""
    value = float(value) + 0.0
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def format_expression(expr: LinearExpression) -> str:
    parts: List[str] = []
    for k, t in enumerate(expr):
        mag = abs(t.coef)
        body = t.var if mag == 1.0 else f"{format_number(mag)} {t.var}"
        if k == 0:
            parts.append(f"-{body}" if t.coef < 0 else body)
        else:
            parts.append(f"- {body}" if t.coef < 0 else f"+ {body}")
    return " ".join(parts)


def format_bound(var: str, b: Bound) -> str:
    lo, up = b.lower, b.upper
    if lo == up:
        return f"{var} = {format_number(lo)}"
    if lo == -INF and up == INF:
        return f"{var} free"
    if up == INF:
        return f"{var} >= {format_number(lo)}"
    return f"{format_number(lo)} <= {var} <= {format_number(up)}"


def serialize_lp(model: Model) -> str:
    """Render ``model`` as LP text.

    Equal models give byte-identical text. Metadata is written as
    ``\\ @meta key = value`` comment lines, injected constraint families sit
    under ``\\ --- <family> ---`` headers.
    """
    lines: List[str] = []
    for key in sorted(model.metadata):
        value = " ".join(model.metadata[key].split())
        lines.append(f"\\ @meta {key} = {value}")
    lines.append("Maximize" if model.sense == MAXIMIZE else "Minimize")
    obj = format_expression(model.objective) or "0"
    lines.append(f" {model.objective_name}: {obj}")
    lines.append("Subject To")
    for k, (group, rows) in enumerate(group_by_family(model.constraints)):
        if group or k > 0:
            lines.append(f"\\ --- {group or BASE_GROUP_HEADER} ---")
        for c in rows:
            lines.append(f" {c.name}: {format_expression(c.expression)} {c.sense} {format_number(c.rhs)}")
    order = model.variables
    if model.bounds:
        lines.append("Bounds")
        for v in order:
            if v in model.bounds:
                lines.append(f" {format_bound(v, model.bounds[v])}")
    for header, kind in (("General", INTEGER), ("Binary", BINARY)):
        names = [v for v in order if model.integrality.get(v) == kind]
        if names:
            lines.append(header)
            lines.extend(f" {v}" for v in names)
    lines.append("End")
    return "\n".join(lines) + "\n"
