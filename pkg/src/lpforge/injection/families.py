"""Constraint blocks for the five business-constraint families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from lpforge.errors import Diagnostic, LPForgeError, warning
from lpforge.lp.model import BINARY, CONTINUOUS, EQ, GE, INTEGER, LE, Bound, LinearExpression, Model, NamedConstraint
from lpforge.lp.propagate import propagate_bounds
from lpforge.injection.spec import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    BatchParams,
    BigMPolicy,
    CrossPeriodParams,
    DeliveryParams,
    LaborParams,
    SchedulingContext,
    SetupParams,
)


@dataclass(frozen=True)
class VarDecl:
    name: str
    kind: str = CONTINUOUS
    bound: Optional[Bound] = None


@dataclass(frozen=True)
class ConstraintBlock:
    family: str
    new_variables: Tuple[VarDecl, ...]
    new_constraints: Tuple[NamedConstraint, ...]
    comment_header: str
    diagnostics: Tuple[Diagnostic, ...] = ()
    big_m: Tuple[Tuple[str, float], ...] = ()  # (row name, M) for every big-M row
    # index roles of new variable / row name prefixes, e.g. ("s", "m,t")
    var_roles: Tuple[Tuple[str, str], ...] = ()
    row_roles: Tuple[Tuple[str, str], ...] = ()


class BigM:
    """Resolves big-M constants for linking rows under a :class:`BigMPolicy`.

    In ``tight`` mode M is the sum of the implied upper bounds of the linked
    variables (bound propagation over the target model), rounded up to an
    integer; unbounded variables fall back to ``policy.default``.
    """

    def __init__(self, model: Optional[Model], policy: BigMPolicy = BigMPolicy()):
        self.policy = policy
        self._upper: Dict[str, object] = {}
        if policy.mode == "tight" and model is not None:
            prop = propagate_bounds(model)
            if not prop.infeasible:
                self._upper = prop.upper

    def value(self, variables: Iterable[str]) -> float:
        if self.policy.mode == "fixed":
            return float(self.policy.default * self.policy.scale)
        total = 0
        for v in variables:
            u = self._upper.get(v, math.inf)
            if u == math.inf:
                return float(self.policy.default * self.policy.scale)
            total += u
        return float(max(1, math.ceil(total * self.policy.scale)))


def _row(name: str, pairs: Sequence[Tuple[float, str]], sense: str, rhs: float, family: str) -> NamedConstraint:
    return NamedConstraint(name, LinearExpression.of(*pairs), sense, rhs, family)


def _linking_rows(ctx: SchedulingContext, big_m: BigM, family: str):
    rows, ms = [], []
    for m in ctx.machines:
        for t in ctx.T:
            for i in ctx.items:
                x = ctx.x(i, m, t)
                M = big_m.value([x])
                name = f"prod_link_{i}_{m}_{t}"
                rows.append(_row(name, [(1, x), (-M, f"y_{m}_{t}")], LE, 0, family))
                ms.append((name, M))
    return rows, ms


def _binaries(prefix: str, indices: Iterable[str]) -> List[VarDecl]:
    return [VarDecl(f"{prefix}_{idx}", BINARY) for idx in indices]


def build_setup_time(ctx: SchedulingContext, p: SetupParams, big_m: BigM, share_state: bool = False) -> ConstraintBlock:
    """Setup-state, start-up and setup-window rows.

    A production start at period ``p`` (``y`` switching 0 -> 1, machines idle
    before period 1) requires a setup window that began at ``p - duration``
    and covered the ``duration`` periods before ``p``. Windows that cannot
    finish inside the horizon are forbidden by fixing their ``z`` to 0.
    With ``share_state`` the ``y`` variables and linking rows already exist.
    """
    fam = SETUP_TIME
    d = p.duration
    T = ctx.periods
    rows, ms = ([], []) if share_state else _linking_rows(ctx, big_m, fam)
    for m in ctx.machines:
        for t in ctx.T:
            rows.append(_row(f"setup_excl_{m}_{t}", [(1, f"y_{m}_{t}"), (1, f"s_{m}_{t}")], LE, 1, fam))
    for m in ctx.machines:
        for t in ctx.T:
            terms: List[Tuple[float, str]] = []
            if t - d >= 1:
                terms.append((1, f"z_{m}_{t - d}"))
            terms.append((-1, f"y_{m}_{t}"))
            if t > 1:
                terms.append((1, f"y_{m}_{t - 1}"))
            rows.append(_row(f"startup_{m}_{t}", terms, GE, 0, fam))
    for m in ctx.machines:
        for t in range(1, T - d + 2):
            terms = [(1, f"s_{m}_{tau}") for tau in range(t, t + d)]
            terms.append((-d, f"z_{m}_{t}"))
            rows.append(_row(f"setup_dur_{m}_{t}", terms, GE, 0, fam))
    decls: List[VarDecl] = []
    prefixes = ("s", "z") if share_state else ("s", "y", "z")
    for prefix in prefixes:
        for m in ctx.machines:
            for t in ctx.T:
                fixed = prefix == "z" and t > T - d + 1
                decls.append(VarDecl(f"{prefix}_{m}_{t}", BINARY, Bound(0, 0) if fixed else None))
    row_roles = [("setup_excl", "m,t"), ("startup", "m,t"), ("setup_dur", "m,t")]
    if not share_state:
        row_roles.insert(0, ("prod_link", "i,m,t"))
    return ConstraintBlock(
        fam, tuple(decls), tuple(rows), f"--- {fam} ---", (), tuple(ms),
        var_roles=tuple((v, "m,t") for v in prefixes),
        row_roles=tuple(row_roles),
    )


def build_human_resource(ctx: SchedulingContext, p: LaborParams, big_m: BigM, share_state: bool = False) -> ConstraintBlock:
    """Workforce capacity per period plus operation/production linking.

    With ``share_state`` the ``y`` variables and linking rows are assumed to
    come from the setup-time block and are not emitted again.
    """
    fam = HUMAN_RESOURCE
    missing = [m for m in ctx.machines if m not in p.r]
    if missing:
        raise LPForgeError("MISSING_PARAM", f"no workforce requirement for machines {missing}")
    rows: List[NamedConstraint] = []
    ms: List[Tuple[str, float]] = []
    for t in ctx.T:
        if t not in p.R:
            raise LPForgeError("MISSING_PARAM", f"no workforce availability for period {t}")
        rows.append(_row(f"workforce_{t}", [(p.r[m], f"y_{m}_{t}") for m in ctx.machines], LE, p.R[t], fam))
    decls: List[VarDecl] = []
    row_roles = [("workforce", "t")]
    var_roles: List[Tuple[str, str]] = []
    if not share_state:
        link, ms = _linking_rows(ctx, big_m, fam)
        rows = link + rows
        decls = [VarDecl(f"y_{m}_{t}", BINARY) for m in ctx.machines for t in ctx.T]
        row_roles.insert(0, ("prod_link", "i,m,t"))
        var_roles.append(("y", "m,t"))
    return ConstraintBlock(fam, tuple(decls), tuple(rows), f"--- {fam} ---", (), tuple(ms), tuple(var_roles), tuple(row_roles))


def build_batch_inventory(ctx: SchedulingContext, p: BatchParams, big_m: BigM) -> ConstraintBlock:
    """Integer batch multiples, minimum batch on activation, inventory caps."""
    fam = BATCH_INVENTORY
    missing = [i for i in ctx.items if i not in p.inventory_cap]
    if missing:
        raise LPForgeError("MISSING_PARAM", f"no inventory capacity for items {missing}")
    rows: List[NamedConstraint] = []
    ms: List[Tuple[str, float]] = []
    idx = [(i, t) for i in ctx.items for t in ctx.T]
    for i, t in idx:
        rows.append(_row(f"batch_{i}_{t}", [(1, ctx.q(i, t)), (-p.multiple, f"k_{i}_{t}")], EQ, 0, fam))
    for i, t in idx:
        rows.append(_row(f"min_batch_{i}_{t}", [(1, ctx.q(i, t)), (-p.min_batch, f"u_{i}_{t}")], GE, 0, fam))
    for i, t in idx:
        q = ctx.q(i, t)
        M = big_m.value([q])
        name = f"activation_{i}_{t}"
        rows.append(_row(name, [(1, q), (-M, f"u_{i}_{t}")], LE, 0, fam))
        ms.append((name, M))
    for i, t in idx:
        rows.append(_row(f"inv_cap_{i}_{t}", [(1, f"I_{i}_{t}")], LE, p.inventory_cap[i], fam))
    decls = (
        [VarDecl(f"k_{i}_{t}", INTEGER, Bound(0, math.inf)) for i, t in idx]
        + [VarDecl(f"u_{i}_{t}", BINARY) for i, t in idx]
        + [VarDecl(f"I_{i}_{t}", CONTINUOUS, Bound(0, math.inf)) for i, t in idx]
    )
    return ConstraintBlock(
        fam, tuple(decls), tuple(rows), f"--- {fam} ---", (), tuple(ms),
        var_roles=(("k", "i,t"), ("u", "i,t"), ("I", "i,t")),
        row_roles=(("batch", "i,t"), ("min_batch", "i,t"), ("activation", "i,t"), ("inv_cap", "i,t")),
    )


def build_cross_period(ctx: SchedulingContext, p: CrossPeriodParams, big_m: BigM) -> ConstraintBlock:
    """Per-machine, per-period capacity and per-item demand over all periods."""
    fam = CROSS_PERIOD
    rows = []
    for m in ctx.machines:
        for t in ctx.T:
            rows.append(_row(f"mach_cap_{m}_{t}", [(1, ctx.x(i, m, t)) for i in ctx.items], LE, ctx.cap(m, t), fam))
    for i in ctx.items:
        terms = [(1, ctx.x(i, m, t)) for m in ctx.machines for t in ctx.T]
        rows.append(_row(f"demand_total_{i}", terms, EQ, ctx.D(i), fam))
    return ConstraintBlock(
        fam, (), tuple(rows), f"--- {fam} ---", row_roles=(("mach_cap", "m,t"), ("demand_total", "i"))
    )


def delivery_count_feasible(demand: float, p: DeliveryParams, periods: int) -> bool:
    """Whether some delivery count n <= ceil(T / interval) has n*d_min <= D <= n*d_max."""
    if demand == 0:
        return True
    slots = -(-periods // p.interval)
    return any(n * p.d_min <= demand <= n * p.d_max for n in range(1, slots + 1))


def build_split_delivery(ctx: SchedulingContext, p: DeliveryParams, big_m: BigM) -> ConstraintBlock:
    """Delivered totals, per-delivery size limits and a sliding minimum interval."""
    fam = SPLIT_DELIVERY
    T = ctx.periods
    rows: List[NamedConstraint] = []
    diags: List[Diagnostic] = []
    for i in ctx.items:
        rows.append(_row(f"deliver_total_{i}", [(1, f"d_{i}_{t}") for t in ctx.T], EQ, ctx.D(i), fam))
        if not delivery_count_feasible(ctx.D(i), p, T):
            diags.append(
                warning(
                    "INFEASIBLE_PARAMS",
                    f"item {i}: demand {ctx.D(i)} cannot be split into deliveries of size "
                    f"[{p.d_min}, {p.d_max}] at most one per {p.interval} periods within {T} periods",
                )
            )
    for i in ctx.items:
        for t in ctx.T:
            rows.append(_row(f"deliver_min_{i}_{t}", [(1, f"d_{i}_{t}"), (-p.d_min, f"v_{i}_{t}")], GE, 0, fam))
    for i in ctx.items:
        for t in ctx.T:
            rows.append(_row(f"deliver_max_{i}_{t}", [(1, f"d_{i}_{t}"), (-p.d_max, f"v_{i}_{t}")], LE, 0, fam))
    for i in ctx.items:
        for t in range(1, T - p.interval + 2):
            rows.append(_row(f"deliver_gap_{i}_{t}", [(1, f"v_{i}_{tau}") for tau in range(t, t + p.interval)], LE, 1, fam))
    decls = [VarDecl(f"d_{i}_{t}") for i in ctx.items for t in ctx.T]
    decls += [VarDecl(f"v_{i}_{t}", BINARY) for i in ctx.items for t in ctx.T]
    return ConstraintBlock(
        fam, tuple(decls), tuple(rows), f"--- {fam} ---", tuple(diags),
        var_roles=(("d", "i,t"), ("v", "i,t")),
        row_roles=(("deliver_total", "i"), ("deliver_min", "i,t"), ("deliver_max", "i,t"), ("deliver_gap", "i,t")),
    )
