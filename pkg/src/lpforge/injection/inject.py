"""Merging family blocks into a model without touching its objective or rows."""

from __future__ import annotations

from typing import Dict, List, Mapping, Set, Tuple

from lpforge.errors import Diagnostic, LPForgeError
from lpforge.lp.model import CONTINUOUS, Model, NamedConstraint
from lpforge.lp.writer import format_number
from lpforge.injection.families import (
    BigM,
    ConstraintBlock,
    build_batch_inventory,
    build_cross_period,
    build_human_resource,
    build_setup_time,
    build_split_delivery,
)
from lpforge.injection.spec import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    InjectionSpec,
)

# families whose blocks use the machine operating state y_{m,t}
STATE_FAMILIES = (SETUP_TIME, HUMAN_RESOURCE)
MAX_SUFFIX = 1000

# metadata keys
INJECTED_KEY = "injected"
STATE_Y_KEY = "state.y"  # name suffix of the y variables currently in the model
STATE_Y_FAMILIES_KEY = "state.y.families"


def suffix_candidates():
    yield ""
    yield "_aug"
    for k in range(2, MAX_SUFFIX + 1):
        yield f"_aug{k}"


def _meta_list(md: Mapping[str, str], key: str) -> List[str]:
    return [p for p in md.get(key, "").split(",") if p]


def _check_patterns(model: Model, spec: InjectionSpec) -> None:
    ctx = spec.context
    present = set(model.variables)
    needed: List[str] = []
    if any(f in spec.families for f in (SETUP_TIME, HUMAN_RESOURCE, CROSS_PERIOD)):
        needed += [ctx.x(i, m, t) for i in ctx.items for m in ctx.machines for t in ctx.T]
    if BATCH_INVENTORY in spec.families:
        needed += [ctx.q(i, t) for i in ctx.items for t in ctx.T]
    missing = [v for v in needed if v not in present]
    if missing:
        shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        raise LPForgeError("PATTERN_UNRESOLVED", f"{len(missing)} pattern names not in the model: {shown}")


def build_blocks(model: Model, spec: InjectionSpec) -> Tuple[List[ConstraintBlock], bool]:
    """Family blocks in canonical order, plus whether the model's y variables are reused.

    The y state is reused from ``model`` when an earlier injection created it
    for the other state family and none of the selected state families has
    been injected against it yet.
    """
    if not spec.families:
        raise LPForgeError("EMPTY_SPEC", "no constraint family selected")
    for fam in spec.families:
        if spec.params(fam) is None:
            raise LPForgeError("MISSING_PARAM", f"family {fam} selected without parameters")
    _check_patterns(model, spec)
    ctx = spec.context
    big_m = BigM(model, spec.big_m)
    reuse = _reuses_state(model, spec)
    blocks: List[ConstraintBlock] = []
    for fam in spec.families:
        if fam == SETUP_TIME:
            blocks.append(build_setup_time(ctx, spec.setup, big_m, share_state=reuse))
        elif fam == HUMAN_RESOURCE:
            shared = reuse or SETUP_TIME in spec.families
            blocks.append(build_human_resource(ctx, spec.labor, big_m, share_state=shared))
        elif fam == BATCH_INVENTORY:
            blocks.append(build_batch_inventory(ctx, spec.batch, big_m))
        elif fam == CROSS_PERIOD:
            blocks.append(build_cross_period(ctx, spec.params(fam), big_m))
        elif fam == SPLIT_DELIVERY:
            blocks.append(build_split_delivery(ctx, spec.delivery, big_m))
    return blocks, reuse


def _y_names(spec: InjectionSpec) -> List[str]:
    return [f"y_{m}_{t}" for m in spec.context.machines for t in spec.context.T]


def inject_with_report(model: Model, spec: InjectionSpec) -> Tuple[Model, Tuple[Diagnostic, ...]]:
    """Augment ``model`` with the selected families; also returns block warnings.

    New names that collide with anything already in the model get one
    suffix per block (``_aug``, ``_aug2``, ...), so a block's names stay
    index-parallel.
    """
    blocks, reuse = build_blocks(model, spec)
    taken: Set[str] = set(model.variables) | set(model.constraint_names)
    rename: Dict[str, str] = {}
    if reuse:
        suffix = model.metadata[STATE_Y_KEY]
        rename.update({y: y + suffix for y in _y_names(spec)})
    suffixes: List[str] = []
    for block in blocks:
        names = [d.name for d in block.new_variables] + [c.name for c in block.new_constraints]
        for suffix in suffix_candidates():
            if not any(n + suffix in taken for n in names):
                break
        else:
            raise LPForgeError("NAME_COLLISION_UNRESOLVABLE", f"no free name suffix for family {block.family}")
        suffixes.append(suffix)
        for n in names:
            rename[n] = n + suffix
            taken.add(n + suffix)

    constraints = list(model.constraints)
    bounds = dict(model.bounds)
    integrality = dict(model.integrality)
    for block in blocks:
        for c in block.new_constraints:
            constraints.append(
                NamedConstraint(rename[c.name], c.expression.rename(rename), c.sense, c.rhs, block.family)
            )
        for d in block.new_variables:
            name = rename[d.name]
            if d.kind != CONTINUOUS:
                integrality[name] = d.kind
            if d.bound is not None:
                bounds[name] = d.bound

    md = dict(model.metadata)
    for k, v in spec.context.to_metadata().items():
        md.setdefault(k, v)
    md[INJECTED_KEY] = ",".join(_meta_list(md, INJECTED_KEY) + list(spec.families))
    for block, suffix in zip(blocks, suffixes):
        if block.big_m:
            values = sorted({m for _, m in block.big_m})
            key = f"big_m.{block.family}{suffix}"
            md[key] = ",".join(format_number(v) for v in values)
        for prefix, roles in block.var_roles:
            md[_role_key("var", prefix, suffix)] = roles
        for prefix, roles in block.row_roles:
            md[_role_key("row", prefix, suffix)] = roles
        if any(d.name.startswith("y_") for d in block.new_variables):
            md[STATE_Y_KEY] = suffix
            md[STATE_Y_FAMILIES_KEY] = ""
    state_fams = [f for f in spec.families if f in STATE_FAMILIES]
    if state_fams:
        md[STATE_Y_FAMILIES_KEY] = ",".join(_meta_list(md, STATE_Y_FAMILIES_KEY) + state_fams)
    if CROSS_PERIOD in spec.families:
        cap_rows = _meta_list(md, "capacity_rows")
        suffix = suffixes[[b.family for b in blocks].index(CROSS_PERIOD)]
        md["capacity_rows"] = ",".join(cap_rows + ["mach_cap" + (f"@{suffix}" if suffix else "")])
    out = Model(model.sense, model.objective_name, model.objective, tuple(constraints), bounds, integrality, md)
    diags = tuple(d for b in blocks for d in b.diagnostics)
    return out, diags


def _reuses_state(model: Model, spec: InjectionSpec) -> bool:
    if STATE_Y_KEY not in model.metadata:
        return False
    selected = [f for f in spec.families if f in STATE_FAMILIES]
    return bool(selected) and not set(selected) & set(_meta_list(model.metadata, STATE_Y_FAMILIES_KEY))


def _role_key(kind: str, prefix: str, suffix: str) -> str:
    return f"roles.{kind}.{prefix}" + (f"@{suffix}" if suffix else "")


def inject(model: Model, spec: InjectionSpec) -> Model:
    """Augmented model; warnings from the blocks are dropped (see :func:`inject_with_report`)."""
    return inject_with_report(model, spec)[0]
