"""Injection specification records and their key/value config form."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from lpforge.errors import LPForgeError
from lpforge.lp.model import Model, format_pairs, parse_pairs
from lpforge.lp.writer import format_number

SETUP_TIME = "SetupTime"
HUMAN_RESOURCE = "HumanResource"
BATCH_INVENTORY = "BatchInventory"
CROSS_PERIOD = "CrossPeriod"
SPLIT_DELIVERY = "SplitDelivery"

# fixed emission order of family blocks
FAMILIES = (SETUP_TIME, HUMAN_RESOURCE, BATCH_INVENTORY, CROSS_PERIOD, SPLIT_DELIVERY)

_INDEX_RE = re.compile(r"[A-Za-z0-9]+\Z")


@dataclass(frozen=True)
class SchedulingContext:
    """Index sets and data binding the families to an existing model.

    ``production_var_pattern`` and ``quantity_var_pattern`` are
    ``str.format`` templates over ``{i}``, ``{m}``, ``{t}``.
    """

    items: Tuple[str, ...]
    machines: Tuple[str, ...]
    periods: int
    demand: Mapping[str, float] = field(default_factory=dict)
    capacity: Mapping[Tuple[str, int], float] = field(default_factory=dict)
    production_var_pattern: str = "x_{i}_{m}_{t}"
    quantity_var_pattern: str = "q_{i}_{t}"

    def __post_init__(self) -> None:
        if self.periods < 1:
            raise LPForgeError("INVALID_CONTEXT", "periods must be >= 1")
        for ident in tuple(self.items) + tuple(self.machines):
            if not _INDEX_RE.match(ident):
                raise LPForgeError("INVALID_CONTEXT", f"index {ident!r} must be alphanumeric")
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "machines", tuple(self.machines))

    @property
    def T(self) -> range:
        return range(1, self.periods + 1)

    def x(self, i: str, m: str, t: int) -> str:
        return self.production_var_pattern.format(i=i, m=m, t=t)

    def q(self, i: str, t: int) -> str:
        return self.quantity_var_pattern.format(i=i, t=t)

    def D(self, i: str) -> float:
        if i not in self.demand:
            raise LPForgeError("MISSING_PARAM", f"no demand for item {i}")
        return self.demand[i]

    def cap(self, m: str, t: int) -> float:
        if (m, t) not in self.capacity:
            raise LPForgeError("MISSING_PARAM", f"no capacity for machine {m} period {t}")
        return self.capacity[(m, t)]

    @classmethod
    def from_model(cls, model: Model) -> "SchedulingContext":
        """Context recorded in a generated model's metadata."""
        md = model.metadata
        try:
            items = tuple(filter(None, md["items"].split(",")))
            machines = tuple(filter(None, md["machines"].split(",")))
            periods = int(md["periods"])
        except KeyError as exc:
            raise LPForgeError("PATTERN_UNRESOLVED", f"model metadata lacks {exc.args[0]!r}") from None
        demand = {k: float(v) for k, v in parse_pairs(md.get("demand", "")).items()}
        capacity = {}
        for k, v in parse_pairs(md.get("capacity", "")).items():
            m, _, t = k.partition("@")
            capacity[(m, int(t))] = float(v)
        return cls(
            items, machines, periods, demand, capacity,
            md.get("pattern.production", "x_{i}_{m}_{t}"),
            md.get("pattern.quantity", "q_{i}_{t}"),
        )

    def to_metadata(self) -> Dict[str, str]:
        return {
            "items": ",".join(self.items),
            "machines": ",".join(self.machines),
            "periods": str(self.periods),
            "demand": format_pairs({i: _num(self.demand[i]) for i in self.items if i in self.demand}),
            "capacity": format_pairs({f"{m}@{t}": _num(v) for (m, t), v in self.capacity.items()}),
            "pattern.production": self.production_var_pattern,
            "pattern.quantity": self.quantity_var_pattern,
        }


@dataclass(frozen=True)
class SetupParams:
    duration: int = 3

    def __post_init__(self) -> None:
        if self.duration < 1:
            raise LPForgeError("INVALID_PARAM", "setup duration must be >= 1")


@dataclass(frozen=True)
class LaborParams:
    r: Mapping[str, int]  # workforce per machine
    R: Mapping[int, int]  # availability per period

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.r.values()) or any(v < 0 for v in self.R.values()):
            raise LPForgeError("INVALID_PARAM", "workforce values must be nonnegative")


@dataclass(frozen=True)
class BatchParams:
    multiple: int = 100
    min_batch: int = 1000
    inventory_cap: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.multiple < 1 or self.min_batch < 1:
            raise LPForgeError("INVALID_PARAM", "batch multiple and minimum must be positive")
        if self.min_batch % self.multiple:
            raise LPForgeError("INVALID_PARAM", "min_batch must be a multiple of the batch multiple")
        if any(v < 0 for v in self.inventory_cap.values()):
            raise LPForgeError("INVALID_PARAM", "inventory caps must be nonnegative")


@dataclass(frozen=True)
class CrossPeriodParams:
    pass


@dataclass(frozen=True)
class DeliveryParams:
    d_min: float
    d_max: float
    interval: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.d_min <= self.d_max:
            raise LPForgeError("INVALID_PARAM", "need 0 < d_min <= d_max")
        if self.interval < 1:
            raise LPForgeError("INVALID_PARAM", "delivery interval must be >= 1")


@dataclass(frozen=True)
class BigMPolicy:
    """``tight``: M from implied upper bounds of the linked variables; ``fixed``: always ``default``."""

    mode: str = "tight"
    default: float = 1e6
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in ("tight", "fixed"):
            raise LPForgeError("INVALID_PARAM", f"unknown big-M mode {self.mode!r}")
        if not self.default > 0 or not self.scale > 0:
            raise LPForgeError("INVALID_PARAM", "big-M default and scale must be positive")


@dataclass(frozen=True)
class InjectionSpec:
    families: Tuple[str, ...]
    context: SchedulingContext
    setup: Optional[SetupParams] = None
    labor: Optional[LaborParams] = None
    batch: Optional[BatchParams] = None
    cross: Optional[CrossPeriodParams] = None
    delivery: Optional[DeliveryParams] = None
    big_m: BigMPolicy = BigMPolicy()

    def __post_init__(self) -> None:
        fams = tuple(self.families)
        unknown = [f for f in fams if f not in FAMILIES]
        if unknown:
            raise LPForgeError("INVALID_PARAM", f"unknown families {unknown}")
        # canonical order, no duplicates
        object.__setattr__(self, "families", tuple(f for f in FAMILIES if f in fams))

    def params(self, family: str):
        return {
            SETUP_TIME: self.setup,
            HUMAN_RESOURCE: self.labor,
            BATCH_INVENTORY: self.batch,
            CROSS_PERIOD: self.cross if self.cross is not None else CrossPeriodParams(),
            SPLIT_DELIVERY: self.delivery,
        }[family]


_num = format_number


# -- key/value config form -------------------------------------------------


def parse_config_text(text: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; later keys override earlier ones."""
    out: Dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise LPForgeError("CONFIG_SYNTAX", f"line {ln}: expected 'key = value'")
        out[key.strip()] = value.strip()
    return out


def format_config_text(values: Mapping[str, str]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())


def spec_to_config(spec: InjectionSpec) -> Dict[str, str]:
    ctx = spec.context
    out = {"families": ",".join(spec.families)}
    out.update({f"context.{k}": v for k, v in ctx.to_metadata().items()})
    out["big_m.mode"] = spec.big_m.mode
    out["big_m.default"] = _num(spec.big_m.default)
    out["big_m.scale"] = _num(spec.big_m.scale)
    if spec.setup is not None:
        out["setup.duration"] = str(spec.setup.duration)
    if spec.labor is not None:
        out["labor.r"] = format_pairs(spec.labor.r)
        out["labor.R"] = format_pairs(spec.labor.R)
    if spec.batch is not None:
        out["batch.multiple"] = str(spec.batch.multiple)
        out["batch.min_batch"] = str(spec.batch.min_batch)
        out["batch.inventory_cap"] = format_pairs({k: _num(v) for k, v in spec.batch.inventory_cap.items()})
    if spec.delivery is not None:
        out["delivery.d_min"] = _num(spec.delivery.d_min)
        out["delivery.d_max"] = _num(spec.delivery.d_max)
        out["delivery.interval"] = str(spec.delivery.interval)
    return out


def spec_from_config(values: Mapping[str, str], model: Optional[Model] = None) -> InjectionSpec:
    """Build a spec from config values; context keys missing from the config fall back to ``model`` metadata."""
    try:
        families = tuple(f.strip() for f in values["families"].split(",") if f.strip())
        ctx_md = {k[len("context."):]: v for k, v in values.items() if k.startswith("context.")}
        if model is not None:
            ctx_md = {**model.metadata, **ctx_md}
        ctx = SchedulingContext.from_model(Model(metadata=ctx_md))
        setup = labor = batch = delivery = None
        if "setup.duration" in values:
            setup = SetupParams(int(values["setup.duration"]))
        if "labor.r" in values:
            labor = LaborParams(
                {k: int(v) for k, v in parse_pairs(values["labor.r"]).items()},
                {int(k): int(v) for k, v in parse_pairs(values.get("labor.R", "")).items()},
            )
        if "batch.multiple" in values:
            batch = BatchParams(
                int(values["batch.multiple"]),
                int(values.get("batch.min_batch", values["batch.multiple"])),
                {k: float(v) for k, v in parse_pairs(values.get("batch.inventory_cap", "")).items()},
            )
        if "delivery.d_min" in values:
            delivery = DeliveryParams(
                float(values["delivery.d_min"]), float(values["delivery.d_max"]), int(values.get("delivery.interval", "1"))
            )
        big_m = BigMPolicy(
            values.get("big_m.mode", "tight"),
            float(values.get("big_m.default", "1e6")),
            float(values.get("big_m.scale", "1")),
        )
    except KeyError as exc:
        raise LPForgeError("CONFIG_SYNTAX", f"missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise LPForgeError("CONFIG_SYNTAX", str(exc)) from None
    return InjectionSpec(families, ctx, setup, labor, batch, CrossPeriodParams(), delivery, big_m)
