"""Seeded generators: base scheduling models, injection pairs, down-scaled
instances with transferred labels, and mutated files for repair testing.

Every random choice is drawn from a ``random.Random`` seeded by
:func:`derive_seed`, so each output is a pure function of its config.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from lpforge import __version__
from lpforge.errors import Diagnostic, LPForgeError
from lpforge.injection import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    FAMILIES,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    BatchParams,
    BigMPolicy,
    CrossPeriodParams,
    DeliveryParams,
    InjectionSpec,
    LaborParams,
    SchedulingContext,
    SetupParams,
    describe_spec,
    inject_with_report,
    spec_to_config,
)
from lpforge.lp.model import EQ, GE, LE, LinearExpression, Model, NamedConstraint, format_pairs
from lpforge.lp.parser import CANONICAL_HEADERS, header_of
from lpforge.lp.writer import format_number, serialize_lp
from lpforge.pruning import PruneLabelSet
from lpforge.solver.core import INFEASIBLE, OPTIMAL, SolveConfig, solve


def derive_seed(seed: int, *labels: object) -> int:
    """Sub-seed for a labelled stream: first 8 bytes of sha256 over ``seed`` and labels."""
    key = "/".join([str(seed)] + [str(x) for x in labels]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass(frozen=True)
class ParamRanges:
    setup_duration: Tuple[int, int] = (1, 4)
    labor_r: Tuple[int, int] = (1, 5)
    # workforce per period as a share of the crews of all machines
    labor_share: Tuple[float, float] = (0.6, 0.9)
    batch_multiples: Tuple[int, ...] = (10, 50, 100)
    min_batch_factor: int = 10
    inventory_cap: Tuple[int, int] = (0, 500)
    # d_max as a share of the largest item demand; d_min as a share of the smallest
    d_max_share: Tuple[float, float] = (0.25, 1.0)
    d_min_share: Tuple[float, float] = (0.25, 0.5)
    interval: Tuple[int, int] = (1, 3)


# fixed parameters matching the worked examples: 3-period setup, lots of 100, minimum lot 1000
CLASSIC_PRESET = ParamRanges(setup_duration=(3, 3), batch_multiples=(100,), min_batch_factor=10)

MUTATIONS = (
    "MISSING_END",
    "SENSE_TOKEN",
    "PAREN_BALANCE",
    "MISSING_DECLARATION",
    "HEADER_SYNONYM",
    "INCOMPLETE_EXPR",
    "MULT_PAREN",
    "IDENT_NORMALIZE",
    "MISSING_BOUNDS",
    "MISSING_OBJECTIVE",
)


def _default_weights() -> Dict[str, float]:
    return {f: 0.4 for f in FAMILIES}


def _default_mutation_rates() -> Dict[str, float]:
    rates = {m: 1.0 for m in MUTATIONS}
    rates["MISSING_OBJECTIVE"] = 0.2
    return rates


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n_items: int = 2
    n_machines: int = 2
    n_periods: int = 4
    demand_range: Tuple[float, float] = (100, 1000)
    capacity_range: Tuple[float, float] = (100, 500)
    cost_range: Tuple[float, float] = (1.0, 10.0)
    family_weights: Mapping[str, float] = field(default_factory=_default_weights)
    param_ranges: ParamRanges = ParamRanges()
    # relative weight of each mutation kind, and how many are stacked per file
    mutation_rates: Mapping[str, float] = field(default_factory=_default_mutation_rates)
    mutation_count: Tuple[int, int] = (1, 3)
    big_m_mode: str = "tight"
    max_retries: int = 20
    # when positive, spec draws whose augmented model is proven infeasible within
    # this many branch-and-bound nodes are redrawn; 0 keeps generation solve-free
    feasibility_screen_nodes: int = 0

    def __post_init__(self) -> None:
        if min(self.n_items, self.n_machines, self.n_periods) < 1:
            raise LPForgeError("INVALID_CONFIG", "index set sizes must be positive")
        for name in ("demand_range", "capacity_range", "cost_range", "mutation_count"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise LPForgeError("INVALID_CONFIG", f"{name} must be a nonnegative interval lo <= hi")
        for k, p in self.family_weights.items():
            if k not in FAMILIES or not 0 <= p <= 1:
                raise LPForgeError("INVALID_CONFIG", f"family weight {k}={p}")
        if not any(self.family_weights.get(f, 0) > 0 for f in FAMILIES):
            raise LPForgeError("INVALID_CONFIG", "at least one family needs a positive weight")
        for k, p in self.mutation_rates.items():
            if k not in MUTATIONS or not 0 <= p <= 1:
                raise LPForgeError("INVALID_CONFIG", f"mutation rate {k}={p}")
        pr = self.param_ranges
        for name in ("setup_duration", "labor_r", "labor_share", "inventory_cap", "d_max_share", "d_min_share", "interval"):
            lo, hi = getattr(pr, name)
            if lo > hi:
                raise LPForgeError("INVALID_CONFIG", f"param range {name} has lo > hi")

    def with_seed(self, seed: int) -> "GenConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> Dict[str, object]:
        d = asdict(self)
        d["family_weights"] = dict(self.family_weights)
        d["mutation_rates"] = dict(self.mutation_rates)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "GenConfig":
        d = dict(d)
        pr = {k: tuple(v) if isinstance(v, list) else v for k, v in dict(d.pop("param_ranges", {})).items()}
        d = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(param_ranges=ParamRanges(**pr), **d)


# -- base models ---------------------------------------------------------------------

BASE_ROLES = {
    "roles.var.x": "i,m,t",
    "roles.var.q": "i,t",
    "roles.row.qdef": "i,t",
    "roles.row.cap": "m,t",
    "roles.row.dem": "i",
    "capacity_rows": "cap",
}


def _context(cfg: GenConfig, rng: random.Random) -> SchedulingContext:
    items = tuple(str(k) for k in range(1, cfg.n_items + 1))
    machines = tuple(f"m{k}" for k in range(1, cfg.n_machines + 1))
    demand = {i: float(rng.randint(int(cfg.demand_range[0]), int(cfg.demand_range[1]))) for i in items}
    capacity = {
        (m, t): float(rng.randint(int(cfg.capacity_range[0]), int(cfg.capacity_range[1])))
        for m in machines
        for t in range(1, cfg.n_periods + 1)
    }
    return SchedulingContext(items, machines, cfg.n_periods, demand, capacity)


def build_base_model(ctx: SchedulingContext, costs: Mapping[Tuple[str, str, int], float], seed: object = "") -> Model:
    """Cost-minimizing production model: ``q = sum_m x``, machine capacity, demand cover."""
    rows: List[NamedConstraint] = []
    for i in ctx.items:
        for t in ctx.T:
            terms = [(1, ctx.q(i, t))] + [(-1, ctx.x(i, m, t)) for m in ctx.machines]
            rows.append(NamedConstraint(f"qdef_{i}_{t}", LinearExpression.of(*terms), EQ, 0))
    for m in ctx.machines:
        for t in ctx.T:
            terms = [(1, ctx.x(i, m, t)) for i in ctx.items]
            rows.append(NamedConstraint(f"cap_{m}_{t}", LinearExpression.of(*terms), LE, ctx.cap(m, t)))
    for i in ctx.items:
        terms = [(1, ctx.q(i, t)) for t in ctx.T]
        rows.append(NamedConstraint(f"dem_{i}", LinearExpression.of(*terms), GE, ctx.D(i)))
    objective = LinearExpression.of(
        *[(costs[(i, m, t)], ctx.x(i, m, t)) for i in ctx.items for m in ctx.machines for t in ctx.T]
    )
    md = dict(ctx.to_metadata())
    md.update(BASE_ROLES)
    md["generator.seed"] = str(seed)
    return Model(objective_name="cost", objective=objective, constraints=tuple(rows), metadata=md)


def generate_base_model(cfg: GenConfig) -> Model:
    """Feasible base model; infeasible draws are redrawn from derived sub-seeds."""
    for attempt in range(cfg.max_retries):
        sub = derive_seed(cfg.seed, "base", attempt)
        rng = random.Random(sub)
        ctx = _context(cfg, rng)
        lo, hi = cfg.cost_range
        costs = {
            (i, m, t): round(rng.uniform(lo, hi), 1)
            for i in ctx.items
            for m in ctx.machines
            for t in ctx.T
        }
        model = build_base_model(ctx, costs, sub)
        if solve(model).status == OPTIMAL:
            return model
    raise LPForgeError("GEN_EXHAUSTED", f"no feasible base model after {cfg.max_retries} draws (seed {cfg.seed})")


# -- injection pairs ---------------------------------------------------------------------


def sample_families(cfg: GenConfig, rng: random.Random) -> Tuple[str, ...]:
    """Each family independently with its weight; if none is drawn, one by weighted choice."""
    w = [cfg.family_weights.get(f, 0.0) for f in FAMILIES]
    chosen = tuple(f for f, p in zip(FAMILIES, w) if rng.random() < p)
    if chosen:
        return chosen
    return (rng.choices(FAMILIES, weights=w)[0],)


def sample_spec(ctx: SchedulingContext, cfg: GenConfig, rng: random.Random) -> InjectionSpec:
    pr = cfg.param_ranges
    families = sample_families(cfg, rng)
    setup = labor = batch = delivery = None
    if SETUP_TIME in families:
        # leave at least one period in which production can follow a setup
        lo, hi = pr.setup_duration
        hi = max(lo, min(hi, ctx.periods - 1))
        setup = SetupParams(rng.randint(lo, hi))
    if HUMAN_RESOURCE in families:
        r = {m: rng.randint(*pr.labor_r) for m in ctx.machines}
        total = sum(r.values())
        R = {t: max(max(r.values()), int(round(rng.uniform(*pr.labor_share) * total))) for t in ctx.T}
        labor = LaborParams(r, R)
    if BATCH_INVENTORY in families:
        multiple = rng.choice(pr.batch_multiples)
        caps = {i: float(rng.randint(*pr.inventory_cap)) for i in ctx.items}
        batch = BatchParams(multiple, multiple * pr.min_batch_factor, caps)
    if SPLIT_DELIVERY in families:
        interval = rng.randint(*pr.interval)
        slots = -(-ctx.periods // interval)
        demands = [ctx.D(i) for i in ctx.items]
        # large enough that the biggest order fits into the available delivery slots
        floor = math.ceil(max(demands) / slots)
        d_max = max(1.0, float(floor), float(round(rng.uniform(*pr.d_max_share) * max(demands))))
        d_min = max(1.0, float(round(rng.uniform(*pr.d_min_share) * min(demands))))
        delivery = DeliveryParams(min(d_min, d_max), d_max, interval)
    cross = CrossPeriodParams() if CROSS_PERIOD in families else None
    return InjectionSpec(families, ctx, setup, labor, batch, cross, delivery, BigMPolicy(cfg.big_m_mode))


@dataclass(frozen=True)
class TrainingPair:
    pair_id: str
    original_lp: str
    description: str
    augmented_lp: str
    spec: InjectionSpec
    seed: int
    diagnostics: Tuple[Diagnostic, ...] = ()


def generate_pair(cfg: GenConfig, pair_id: Optional[str] = None) -> TrainingPair:
    base = generate_base_model(cfg)
    ctx = SchedulingContext.from_model(base)
    last: Optional[LPForgeError] = None
    for attempt in range(cfg.max_retries):
        rng = random.Random(derive_seed(cfg.seed, "spec", attempt))
        try:
            spec = sample_spec(ctx, cfg, rng)
            augmented, diags = inject_with_report(base, spec)
        except LPForgeError as exc:
            last = exc
            continue
        if cfg.feasibility_screen_nodes > 0 and attempt + 1 < cfg.max_retries:
            verdict = solve(augmented, SolveConfig(node_limit=cfg.feasibility_screen_nodes)).status
            if verdict == INFEASIBLE:
                last = LPForgeError("GEN_EXHAUSTED", "augmented model infeasible")
                continue
        text = describe_spec(spec, derive_seed(cfg.seed, "text"))
        return TrainingPair(
            pair_id or f"pair-{cfg.seed}", serialize_lp(base), text, serialize_lp(augmented), spec, cfg.seed, diags
        )
    raise LPForgeError("GEN_EXHAUSTED", f"injection failed for every draw: {last}")


def pair_seed(master: int, index: int) -> int:
    return derive_seed(master, "pair", index)


def _pair_job(args: Tuple[Dict[str, object], int, str]) -> TrainingPair:
    cfg_dict, seed, pair_id = args
    return generate_pair(GenConfig.from_dict(cfg_dict).with_seed(seed), pair_id)


def generate_dataset(cfg: GenConfig, n: int, jobs: int = 1) -> List[TrainingPair]:
    """``n`` pairs with ids ``00000``...; pair k uses seed ``pair_seed(cfg.seed, k)``."""
    tasks = [(cfg.to_dict(), pair_seed(cfg.seed, k), f"{k:05d}") for k in range(n)]
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_pair_job, tasks, chunksize=max(1, n // (4 * jobs))))
    return [_pair_job(t) for t in tasks]


MANIFEST_NAME = "manifest.json"


def dataset_manifest(cfg: GenConfig, pairs: Sequence[TrainingPair]) -> Dict[str, object]:
    return {
        "tool": "lpforge",
        "version": __version__,
        "config": cfg.to_dict(),
        "pairs": [
            {"pair_id": p.pair_id, "seed": p.seed, "families": list(p.spec.families), "spec": spec_to_config(p.spec)}
            for p in pairs
        ],
    }


def write_dataset(out_dir: str, cfg: GenConfig, pairs: Sequence[TrainingPair]) -> str:
    """Write ``<pair_id>/{original.lp,description.txt,augmented.lp}`` and the manifest; returns the manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    for p in pairs:
        d = os.path.join(out_dir, p.pair_id)
        os.makedirs(d, exist_ok=True)
        for name, text in (("original.lp", p.original_lp), ("description.txt", p.description), ("augmented.lp", p.augmented_lp)):
            with open(os.path.join(d, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset_manifest(cfg, pairs), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def regenerate_from_manifest(manifest: Mapping[str, object], jobs: int = 1) -> List[TrainingPair]:
    cfg = GenConfig.from_dict(manifest["config"])
    tasks = [(cfg.to_dict(), int(p["seed"]), p["pair_id"]) for p in manifest["pairs"]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_pair_job, tasks))
    return [_pair_job(t) for t in tasks]


# -- down-scaling ------------------------------------------------------------------------


def _role_patterns(md: Mapping[str, str], kind: str) -> List[Tuple[re.Pattern, int]]:
    """(name regex, position of the item index or -1) for every recorded role of ``kind``."""
    out = []
    prefix = f"roles.{kind}."
    for key, roles in md.items():
        if not key.startswith(prefix):
            continue
        stem, _, suffix = key[len(prefix):].partition("@")
        parts = roles.split(",")
        body = "_".join(r"(\d+)" if r == "t" else r"([A-Za-z0-9]+)" for r in parts)
        rx = re.compile(re.escape(stem) + "_" + body + re.escape(suffix) + r"\Z")
        out.append((rx, parts.index("i") if "i" in parts else -1))
    return out


def _item_of(name: str, patterns: List[Tuple[re.Pattern, int]]) -> Optional[str]:
    for rx, pos in patterns:
        m = rx.match(name)
        if m:
            return m.group(pos + 1) if pos >= 0 else None
    return None


def _matches_any(name: str, stems: Sequence[str]) -> bool:
    for entry in stems:
        stem, _, suffix = entry.partition("@")
        if name.startswith(stem + "_") and name.endswith(suffix):
            return True
    return False


def _weighted_sample(items: Sequence[str], weights: Sequence[float], k: int, rng: random.Random) -> List[str]:
    pool = list(zip(items, weights))
    chosen = []
    for _ in range(k):
        total = sum(w for _, w in pool)
        if total > 0:
            r = rng.random() * total
            acc = 0.0
            idx = len(pool) - 1
            for n, (_, w) in enumerate(pool):
                acc += w
                if r < acc and w > 0:
                    idx = n
                    break
        else:
            idx = rng.randrange(len(pool))
        chosen.append(pool.pop(idx)[0])
    return chosen


def downscale_instance(model: Model, keep_fraction: float, seed: int) -> Tuple[Model, Dict[str, str]]:
    """Keep ``ceil(keep_fraction * |items|)`` items, drawn demand-weighted without replacement.

    Item-indexed rows and variables of dropped items are removed, their terms
    vanish from the remaining rows, and capacity rows are scaled by the
    retained share of total demand. The returned map is the identity on the
    surviving variables.
    """
    if not 0 < keep_fraction <= 1:
        raise LPForgeError("INVALID_PARAM", "keep_fraction must lie in (0, 1]")
    ctx = SchedulingContext.from_model(model)
    n_keep = math.ceil(keep_fraction * len(ctx.items) - 1e-9)
    if n_keep < 1:
        raise LPForgeError("EMPTY_RESULT", "no item survives the requested fraction")
    if n_keep >= len(ctx.items):
        return model, {v: v for v in model.variables}
    rng = random.Random(derive_seed(seed, "downscale"))
    weights = [ctx.demand.get(i, 0.0) for i in ctx.items]
    picked = set(_weighted_sample(ctx.items, weights, n_keep, rng))
    kept = [i for i in ctx.items if i in picked]
    total = sum(weights)
    share = sum(ctx.demand.get(i, 0.0) for i in kept) / total if total > 0 else len(kept) / len(ctx.items)

    var_roles = _role_patterns(model.metadata, "var")
    row_roles = _role_patterns(model.metadata, "row")
    cap_stems = [s for s in model.metadata.get("capacity_rows", "").split(",") if s]
    removed = {v for v in model.variables if (_item_of(v, var_roles) or kept[0]) not in picked}
    rows = []
    for c in model.constraints:
        if (_item_of(c.name, row_roles) or kept[0]) not in picked:
            continue
        expr = c.expression.without(removed)
        if not len(expr):
            continue
        rhs = c.rhs * share if _matches_any(c.name, cap_stems) else c.rhs
        rows.append(replace(c, expression=expr, rhs=rhs))
    md = dict(model.metadata)
    md["items"] = ",".join(kept)
    md["demand"] = format_pairs({i: format_number(ctx.demand[i]) for i in kept if i in ctx.demand})
    md["capacity"] = format_pairs({f"{m}@{t}": format_number(v * share) for (m, t), v in ctx.capacity.items()})
    md["downscale"] = f"keep={format_number(keep_fraction)};seed={seed}"
    out = Model(
        model.sense,
        model.objective_name,
        model.objective.without(removed),
        tuple(rows),
        {v: b for v, b in model.bounds.items() if v not in removed},
        {v: k for v, k in model.integrality.items() if v not in removed},
        md,
    )
    survivors = set(out.variables)
    return out, {v: v for v in model.variables if v in survivors}


def transfer_labels(labels: PruneLabelSet, name_map: Mapping[str, str]) -> PruneLabelSet:
    """Labels restricted to mapped names; ``z_star`` is marked stale."""
    unknown = [v for v in name_map if v not in labels.labels]
    if unknown:
        raise LPForgeError("UNMAPPED_NAME", f"names without a label: {', '.join(unknown[:5])}")
    new_labels = {name_map[v]: lab for v, lab in labels.labels.items() if v in name_map}
    cert = {name_map[v]: c for v, c in labels.certification.items() if v in name_map}
    return PruneLabelSet(labels.model_id, labels.z_star, new_labels, cert, True)


# -- repair corpus ---------------------------------------------------------------------------

_SYNONYMS_OUT = {
    "Subject To": ("st", "s.t.", "subject to", "SUBJECT TO"),
    "Bounds": ("bounds", "bound"),
    "General": ("int", "general", "generals", "integers"),
    "Binary": ("bin", "binary", "binaries"),
}
_BREAK_SENSE = {"<=": ("=<", "<"), ">=": ("=>", ">"), "=": ("==",)}
_CONSTRAINT_RE = re.compile(r"^(\s*[A-Za-z_][A-Za-z0-9_]*\s*:\s*)(.*?)\s*(<=|>=|=)\s*(\S+)\s*$")
_BAD_SENSE_RE = re.compile(r"=<|=>|==|<(?!=)|>(?!=)")
_TERM_RE = re.compile(r"(?<![\w.])(\d+(?:\.\d+)?(?:e[+-]?\d+)?) ([A-Za-z_][A-Za-z0-9_]*)")
_IDX_NAME_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)((?:_[A-Za-z0-9]+)+)\Z")


def _sections(lines: Sequence[str]) -> List[Optional[str]]:
    out = []
    section = None
    for raw in lines:
        content = raw.split("\\", 1)[0].strip()
        hdr = header_of(content) if content else None
        if hdr is not None:
            section = CANONICAL_HEADERS[hdr]
            out.append("header")
        else:
            out.append(section if content else None)
    return out


def _word_sub(text: str, old: str, new: str) -> str:
    return re.sub(r"(?<![A-Za-z0-9_])" + re.escape(old) + r"(?![A-Za-z0-9_])", new, text)


class _Mutator:
    def __init__(self, text: str, rng: random.Random):
        self.lines = text.split("\n")
        self.rng = rng

    def secs(self) -> List[Optional[str]]:
        return _sections(self.lines)

    def content_lines(self, section: str) -> List[int]:
        return [k for k, s in enumerate(self.secs()) if s == section and "\\" not in self.lines[k]]

    def header_line(self, name: str) -> Optional[int]:
        for k, raw in enumerate(self.lines):
            if raw.split("\\", 1)[0].strip() == name:
                return k
        return None

    def constraint_lines(self) -> List[int]:
        """Well-formed single-line rows not yet touched by a sense mutation."""
        return [
            k for k in self.content_lines("constraints")
            if _CONSTRAINT_RE.match(self.lines[k]) and not _BAD_SENSE_RE.search(self.lines[k])
        ]

    # each returns True when it changed the text

    def missing_end(self) -> bool:
        k = self.header_line("End")
        if k is None:
            return False
        del self.lines[k]
        return True

    def sense_token(self) -> bool:
        cands = self.constraint_lines()
        if not cands:
            return False
        k = self.rng.choice(cands)
        m = _CONSTRAINT_RE.match(self.lines[k])
        bad = self.rng.choice(_BREAK_SENSE[m.group(3)])
        self.lines[k] = f"{m.group(1)}{m.group(2)} {bad} {m.group(4)}"
        return True

    def paren_balance(self) -> bool:
        cands = self.constraint_lines()
        if not cands:
            return False
        k = self.rng.choice(cands)
        m = _CONSTRAINT_RE.match(self.lines[k])
        if self.rng.random() < 0.5:
            self.lines[k] = self.lines[k].rstrip() + ")"
        else:
            self.lines[k] = m.group(1) + "(" + self.lines[k][m.end(1):]
        return True

    def incomplete_expr(self) -> bool:
        cands = [k for k in self.constraint_lines() if not _CONSTRAINT_RE.match(self.lines[k]).group(2).rstrip().endswith(("+", "-"))]
        if not cands:
            return False
        k = self.rng.choice(cands)
        m = _CONSTRAINT_RE.match(self.lines[k])
        self.lines[k] = f"{m.group(1)}{m.group(2)} + {m.group(3)} {m.group(4)}"
        return True

    def mult_paren(self) -> bool:
        cands = [k for k in self.constraint_lines() if _TERM_RE.search(_CONSTRAINT_RE.match(self.lines[k]).group(2))]
        if not cands:
            return False
        k = self.rng.choice(cands)
        m = _CONSTRAINT_RE.match(self.lines[k])
        body = _TERM_RE.sub(lambda t: f"{t.group(1)}({t.group(2)})", m.group(2), count=1)
        self.lines[k] = f"{m.group(1)}{body} {m.group(3)} {m.group(4)}"
        return True

    def header_synonym(self) -> bool:
        cands = [h for h in _SYNONYMS_OUT if self.header_line(h) is not None]
        if not cands:
            return False
        h = self.rng.choice(cands)
        self.lines[self.header_line(h)] = self.rng.choice(_SYNONYMS_OUT[h])
        return True

    def _declared(self, section: str) -> Dict[str, int]:
        out = {}
        for k in self.content_lines(section):
            for name in self.lines[k].split():
                out[name] = k
        return out

    def missing_declaration(self) -> bool:
        used = self._used()
        cands = []
        for section in ("general", "binary"):
            decl = self._declared(section)
            shapes: Dict[Tuple[str, int], int] = {}
            for v in decl:
                shapes[_shape(v)] = shapes.get(_shape(v), 0) + 1
            cands += [(v, k) for v, k in decl.items() if shapes[_shape(v)] > 1 and v in used and self.lines[k].split() == [v]]
        if not cands:
            return False
        _, k = self.rng.choice(cands)
        del self.lines[k]
        return True

    def missing_bounds(self) -> bool:
        general = self._declared("general")
        cands = [k for k in self.content_lines("bounds") if self.lines[k].split()[1:] == [">=", "0"] and self.lines[k].split()[0] in general]
        if not cands:
            return False
        del self.lines[self.rng.choice(cands)]
        return True

    def missing_objective(self) -> bool:
        k = next((self.header_line(h) for h in ("Minimize", "Maximize") if self.header_line(h) is not None), None)
        if k is None:
            return False
        end = k + 1
        secs = self.secs()
        while end < len(self.lines) and secs[end] != "header":
            end += 1
        keep = [ln for ln in self.lines[k + 1:end] if ln.lstrip().startswith("\\")]
        self.lines[k:end] = keep
        return True

    def ident_normalize(self) -> bool:
        cands = sorted(n for n in self._used() if _IDX_NAME_RE.match(n))
        if not cands:
            return False
        name = self.rng.choice(cands)
        m = _IDX_NAME_RE.match(name)
        raw = m.group(1) + "[" + ",".join(m.group(2)[1:].split("_")) + "]"
        for k, raw_line in enumerate(self.lines):
            content, sep, comment = raw_line.partition("\\")
            self.lines[k] = _word_sub(content, name, raw) + sep + comment
        return True

    def _used(self) -> Set[str]:
        out: Set[str] = set()
        secs = self.secs()
        for k, s in enumerate(secs):
            if s in ("objective", "constraints", "bounds"):
                content = self.lines[k].split("\\", 1)[0]
                content = re.sub(r"^\s*[A-Za-z_][A-Za-z0-9_]*\s*:", "", content)
                out.update(re.findall(r"(?<![A-Za-z0-9_.])[A-Za-z_][A-Za-z0-9_]*", content))
        return out - {"inf", "infinity", "free"}


def _shape(name: str) -> Tuple[str, int]:
    return name.split("_", 1)[0], name.count("_")


_MUTATORS = {
    "MISSING_END": _Mutator.missing_end,
    "SENSE_TOKEN": _Mutator.sense_token,
    "PAREN_BALANCE": _Mutator.paren_balance,
    "MISSING_DECLARATION": _Mutator.missing_declaration,
    "HEADER_SYNONYM": _Mutator.header_synonym,
    "INCOMPLETE_EXPR": _Mutator.incomplete_expr,
    "MULT_PAREN": _Mutator.mult_paren,
    "IDENT_NORMALIZE": _Mutator.ident_normalize,
    "MISSING_BOUNDS": _Mutator.missing_bounds,
    "MISSING_OBJECTIVE": _Mutator.missing_objective,
}


def mutate_for_repair(lp_text: str, cfg: GenConfig) -> Tuple[str, frozenset]:
    """Break a clean file with stacked mutations; returns the text and the repair rules that must fire.

    Each mutation kind is used at most once per file; kinds are drawn by
    ``cfg.mutation_rates`` and applied in a fixed order so that no later
    mutation can hide an earlier one.
    """
    rng = random.Random(derive_seed(cfg.seed, "mutate"))
    lo, hi = cfg.mutation_count
    kinds = [k for k in MUTATIONS if cfg.mutation_rates.get(k, 0) > 0]
    weights = [cfg.mutation_rates[k] for k in kinds]
    want = min(rng.randint(lo, hi), len(kinds))
    chosen: List[str] = []
    while len(chosen) < want:
        pick = rng.choices(kinds, weights=weights)[0]
        if pick not in chosen:
            chosen.append(pick)
    mut = _Mutator(lp_text, rng)
    expected = set()
    for kind in MUTATIONS:  # fixed application order
        if kind in chosen and _MUTATORS[kind](mut):
            expected.add(kind)
    return "\n".join(mut.lines), frozenset(expected)
