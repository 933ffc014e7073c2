"""Shared builders for the test suite."""

import math
import random
from fractions import Fraction

from lpforge.datagen import build_base_model
from lpforge.injection import (
    FAMILIES,
    BatchParams,
    BigMPolicy,
    CrossPeriodParams,
    DeliveryParams,
    InjectionSpec,
    LaborParams,
    SchedulingContext,
    SetupParams,
)
from lpforge.lp.model import (
    BINARY,
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
)


def canonical_context() -> SchedulingContext:
    """2 items x 2 machines x 4 periods, the instance behind the golden file."""
    caps = {(m, t): 250.0 for m in ("m1", "m2") for t in range(1, 5)}
    return SchedulingContext(("1", "2"), ("m1", "m2"), 4, {"1": 300.0, "2": 200.0}, caps)


def canonical_base() -> Model:
    ctx = canonical_context()
    costs = {
        (i, m, t): float(t + (1 if m == "m1" else 2) + (0 if i == "1" else 1))
        for i in ctx.items
        for m in ctx.machines
        for t in ctx.T
    }
    return build_base_model(ctx, costs, "golden")


def canonical_spec(families=FAMILIES, ctx=None) -> InjectionSpec:
    ctx = ctx or canonical_context()
    return InjectionSpec(
        tuple(families),
        ctx,
        SetupParams(3) if "SetupTime" in families else None,
        LaborParams({"m1": 3, "m2": 2}, {t: 4 for t in ctx.T}) if "HumanResource" in families else None,
        BatchParams(100, 1000, {i: 500.0 if i == "1" else 400.0 for i in ctx.items}) if "BatchInventory" in families else None,
        CrossPeriodParams() if "CrossPeriod" in families else None,
        DeliveryParams(100.0, 200.0, 2) if "SplitDelivery" in families else None,
        BigMPolicy(),
    )


def toy_context(items=("1",), machines=("m1",), periods=2, demand=None, cap=10.0) -> SchedulingContext:
    demand = demand if demand is not None else {i: 0.0 for i in items}
    caps = {(m, t): cap for m in machines for t in range(1, periods + 1)}
    return SchedulingContext(tuple(items), tuple(machines), periods, dict(demand), caps)


def toy_base(ctx: SchedulingContext) -> Model:
    costs = {(i, m, t): 1.0 for i in ctx.items for m in ctx.machines for t in ctx.T}
    return build_base_model(ctx, costs, "toy")


def random_milp(rng: random.Random, max_int: int = 10, max_rows: int = 8, mixed_lattice_cap: int = 400) -> Model:
    """Small random MILP with bounded integer variables; continuous variables optional."""
    n_int = rng.randint(1, max_int)
    n_cont = rng.choice([0, 0, 0, 1, 2])
    names = [f"i{k}" for k in range(n_int)] + [f"c{k}" for k in range(n_cont)]
    bounds, integrality = {}, {}
    for k in range(n_int):
        v = names[k]
        if rng.random() < 0.5:
            integrality[v] = BINARY
        else:
            integrality[v] = INTEGER
            lo = rng.randint(-2, 0)
            bounds[v] = Bound(lo, lo + rng.randint(1, 3))
    if n_cont:
        # keep the per-lattice-point LP count small for the enumeration oracle
        while _lattice(bounds, integrality) > mixed_lattice_cap:
            wide = [u for u in integrality if integrality[u] == INTEGER and bounds[u].upper - bounds[u].lower > 1]
            if wide:
                v = wide[0]
                bounds[v] = Bound(bounds[v].lower, bounds[v].upper - 1)
            else:
                # relax one integer variable to a continuous one on the same range
                v = next(iter(integrality))
                del integrality[v]
                bounds[v] = bounds.get(v, Bound(0, 1))
    for k in range(n_cont):
        v = names[n_int + k]
        bounds[v] = Bound(0, rng.choice([4, 10, math.inf]))
    # most instances get right-hand sides around a planted point, so they are feasible
    planted = None
    if rng.random() < 0.8:
        planted = {}
        for v in names:
            b = bounds.get(v, Bound(0, 1))
            hi = b.upper if math.isfinite(b.upper) else b.lower + 5
            planted[v] = rng.randint(int(b.lower), int(hi))
    rows = []
    for r in range(rng.randint(1, max_rows)):
        vs = rng.sample(names, min(len(names), rng.randint(1, 4)))
        coefs = [rng.choice([-3, -2, -1, 1, 1, 2, 3, 0.5, 1.5]) for _ in vs]
        sense = rng.choice([LE, LE, GE, EQ]) if len(vs) > 1 else rng.choice([LE, GE])
        if planted is None:
            rhs = rng.randint(-3, 6)
        else:
            lhs = sum(c * planted[v] for c, v in zip(coefs, vs))
            slack = rng.randint(0, 3)
            rhs = lhs + slack if sense == LE else lhs - slack if sense == GE else lhs
        rows.append(NamedConstraint(f"r{r}", LinearExpression.of(*zip(coefs, vs)), sense, rhs))
    obj = LinearExpression.of(*[(rng.randint(-5, 5) or 1, v) for v in names])
    return Model(rng.choice([MINIMIZE, MAXIMIZE]), "obj", obj, tuple(rows), bounds, integrality)


def _lattice(bounds, integrality) -> int:
    size = 1
    for v, kind in integrality.items():
        size *= 2 if kind == BINARY else int(bounds[v].upper - bounds[v].lower) + 1
    return size


def rel_close(a, b, tol: float) -> bool:
    a, b = Fraction(a), Fraction(b)
    return abs(a - b) <= Fraction(tol) * max(1, abs(a), abs(b))


def preservation_problems(base: Model, augmented: Model) -> list:
    """Reasons ``augmented`` is not a pure extension of ``base``; empty when it is."""
    from lpforge.lp import diff_models

    d = diff_models(base, augmented)
    problems = []
    if d.objective_changed:
        problems.append("objective changed")
    for label, names in (("removed rows", d.removed_constraints), ("modified rows", d.modified_constraints),
                         ("removed vars", d.removed_variables), ("modified vars", d.modified_variables)):
        if names:
            problems.append(f"{label}: {list(names)[:3]}")
    if augmented.constraints[:len(base.constraints)] != base.constraints:
        problems.append("original rows reordered")
    return problems


def integer_lattice(model: Model):
    """Every integer point in the box of a pure-integer model (None when some variable is continuous or unbounded)."""
    import itertools

    axes = []
    for v in model.variables:
        if model.kind_of(v) == "continuous":
            return None
        b = model.bound_of(v)
        if not (math.isfinite(b.lower) and math.isfinite(b.upper)):
            return None
        axes.append(range(math.ceil(b.lower), math.floor(b.upper) + 1))
    names = model.variables
    return (dict(zip(names, point)) for point in itertools.product(*axes))


def optimal_points(model: Model):
    """(z*, all optimal points) of a bounded pure-integer model by enumeration; (None, []) if infeasible."""
    best, points = None, []
    sign = 1 if model.sense == MINIMIZE else -1
    for point in integer_lattice(model):
        ok = True
        for c in model.constraints:
            lhs = sum((Fraction(t.coef) * point[t.var] for t in c.expression), Fraction(0))
            rhs = Fraction(c.rhs)
            if (c.sense == LE and lhs > rhs) or (c.sense == GE and lhs < rhs) or (c.sense == EQ and lhs != rhs):
                ok = False
                break
        if not ok:
            continue
        z = sign * sum((Fraction(t.coef) * point[t.var] for t in model.objective), Fraction(0))
        if best is None or z < best:
            best, points = z, [point]
        elif z == best:
            points.append(point)
    return (None if best is None else sign * best), points


def pure_integer_milp(rng: random.Random, max_lattice: int = 4096, feasible: bool = False) -> Model:
    """random_milp restricted to bounded pure-integer instances with an enumerable lattice."""
    while True:
        m = random_milp(rng, max_int=8, max_rows=6)
        if any(m.kind_of(v) == "continuous" for v in m.variables):
            continue
        if _lattice(dict(m.bounds), dict(m.integrality)) > max_lattice:
            continue
        if feasible and optimal_points(m)[0] is None:
            continue
        return m


METRIC_REFERENCE = "Minimize\n obj: x + y\nSubject To\n c: x + y >= 2\nEnd\n"


def ten_entry_candidates():
    """(sample_id, candidate text) pairs: 1 absent, 3 broken, 3 wrong verdict or value, 3 correct."""
    return [
        ("s00", None),
        ("s01", "garbage"),
        ("s02", "Minimize\n obj: x\nSubject To\n c: >= 1\nEnd\n"),
        ("s03", "Minimize\n obj: x + y\nSubject To\n c: x + y\nEnd\n"),
        ("s04", "Maximize\n obj: x\nSubject To\n c: x >= 1\nEnd\n"),
        ("s05", "Minimize\n obj: x\nSubject To\n c: x >= 1\n d: x <= 0\nEnd\n"),
        ("s06", "Minimize\n obj: x + y\nSubject To\n c: x + y >= 3\nEnd\n"),
        ("s07", METRIC_REFERENCE),
        # repairable: bad sense token and no End line
        ("s08", "Minimize\n obj: x + y\nSubject To\n c: x + y => 2\n"),
        # a different formulation with the same optimum
        ("s09", "Minimize\n obj: 2 a\nSubject To\n c: a >= 1\nEnd\n"),
    ]


def check_pair(pair) -> list:
    """Every TrainingPair invariant; returns a list of failures."""
    from lpforge.datagen import derive_seed
    from lpforge.errors import count_errors
    from lpforge.injection import describe_spec
    from lpforge.lp import parse_lp, validate

    problems = []
    base, aug = parse_lp(pair.original_lp), parse_lp(pair.augmented_lp)
    if count_errors(validate(base)) or count_errors(validate(aug)):
        problems.append("validation errors")
    problems += preservation_problems(base, aug)
    if pair.description != describe_spec(pair.spec, derive_seed(pair.seed, "text")):
        problems.append("description mismatch")
    return problems
