"""English descriptions of an injection spec, rendered from fixed templates."""

from __future__ import annotations

import random
from typing import Callable, Dict, List, Mapping

from lpforge.lp.writer import format_number
from lpforge.injection.spec import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    InjectionSpec,
)

# each family's display name appears exactly once in a description
DISPLAY_NAMES = {
    SETUP_TIME: "Setup time",
    HUMAN_RESOURCE: "Human resource",
    BATCH_INVENTORY: "Batch size and inventory capacity",
    CROSS_PERIOD: "Cross-period production",
    SPLIT_DELIVERY: "Split delivery",
}

_WORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
          "eleven", "twelve"]


def number_word(n: int) -> str:
    return _WORDS[n] if 0 <= n < len(_WORDS) else str(n)


def _pairs(mapping: Mapping[object, object]) -> str:
    return ", ".join(f"{k}: {format_number(v)}" for k, v in mapping.items())


def _setup(spec: InjectionSpec) -> List[str]:
    d = spec.setup.duration
    words = number_word(d)
    span = "one period" if d == 1 else f"{words} consecutive periods"
    return [
        f"a machine may start producing only after a setup of {span}; "
        "a machine cannot be in setup and in production in the same period, and setups that cannot finish "
        "within the planning horizon are not allowed.",
        f"before each production start a machine must spend {span} in setup, "
        "during which it produces nothing; machines are idle before the first period.",
    ]


def _labor(spec: InjectionSpec) -> List[str]:
    r, R = _pairs(spec.labor.r), _pairs(spec.labor.R)
    return [
        f"each operating machine needs a crew (workers per machine {r}), and the crews working in a period "
        f"may not exceed the available workforce (workers per period {R}).",
        f"the workers needed by all machines running in a period must fit within that period's availability; "
        f"requirements per machine are {r} and availability per period is {R}.",
    ]


def _batch(spec: InjectionSpec) -> List[str]:
    b = spec.batch
    caps = _pairs(b.inventory_cap)
    return [
        f"production quantities must be integer multiples of {b.multiple}, any activated lot must be at least "
        f"{b.min_batch} units, and inventory is capped per item ({caps}).",
        f"lots come in steps of {b.multiple} units with a minimum lot of {b.min_batch} whenever production "
        f"is activated; stored inventory per item may not exceed {caps}.",
    ]


def _cross(spec: InjectionSpec) -> List[str]:
    ctx = spec.context
    dem = _pairs({i: ctx.D(i) for i in ctx.items})
    return [
        f"each machine's output in a period is limited by its capacity, and over all machines and periods the "
        f"production of each item must equal its demand ({dem}).",
        f"total production of every item across all machines and periods has to match demand ({dem}) "
        "while no machine exceeds its per-period capacity.",
    ]


def _delivery(spec: InjectionSpec) -> List[str]:
    p = spec.delivery
    gap = number_word(p.interval)
    window = "period" if p.interval == 1 else f"window of {gap} consecutive periods"
    return [
        f"orders may be delivered in several shipments of between {format_number(p.d_min)} and "
        f"{format_number(p.d_max)} units each, at most one shipment per item in any {window}, and the shipments "
        "of an item must add up to its demand.",
        f"each item's demand is shipped in parts, every shipment carrying {format_number(p.d_min)} to "
        f"{format_number(p.d_max)} units, with no two shipments of an item inside one {window}.",
    ]


_TEMPLATES: Dict[str, Callable[[InjectionSpec], List[str]]] = {
    SETUP_TIME: _setup,
    HUMAN_RESOURCE: _labor,
    BATCH_INVENTORY: _batch,
    CROSS_PERIOD: _cross,
    SPLIT_DELIVERY: _delivery,
}

_OPENERS = [
    "Add the following business constraints to the model without changing its objective.",
    "Extend the existing model with these operating rules; keep the objective as it is.",
]


def describe_spec(spec: InjectionSpec, seed: object = 0) -> str:
    """Deterministic description of every selected family; ``seed`` picks phrasing variants."""
    rng = random.Random(f"describe:{seed}")
    lines = [rng.choice(_OPENERS)]
    for fam in spec.families:
        body = rng.choice(_TEMPLATES[fam](spec))
        lines.append(f"- {DISPLAY_NAMES[fam]}: {body}")
    return "\n".join(lines) + "\n"
