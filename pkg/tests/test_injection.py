import dataclasses
import os
import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from helpers import canonical_base, canonical_context, canonical_spec, preservation_problems, toy_base, toy_context
from lpforge.datagen import GenConfig, generate_pair
from lpforge.errors import LPForgeError
from lpforge.injection import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    DISPLAY_NAMES,
    FAMILIES,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    BatchParams,
    BigMPolicy,
    DeliveryParams,
    InjectionSpec,
    LaborParams,
    SetupParams,
    describe_spec,
    inject,
    inject_with_report,
    spec_from_config,
    spec_to_config,
)
from lpforge.lp import parse_lp, serialize_lp
from lpforge.solver.core import INFEASIBLE, OPTIMAL, solve

GOLDEN = os.path.join(os.path.dirname(__file__), "golden", "all_families_2x2x4.lp")

# Written out by hand from the family definitions for the canonical instance
# (2 items, 2 machines, 4 periods, D = 300/200, capacity 250 everywhere,
# setup 3 periods, r = 3/2, R = 4, batches of 100 with minimum 1000,
# inventory caps 500/400, deliveries between 100 and 200 at least 2 apart).
HAND_DERIVED = [
    "\\ @meta big_m.BatchInventory = 500",
    "\\ @meta big_m.SetupTime = 250",
    "\\ --- SetupTime ---",
    " prod_link_1_m1_1: x_1_m1_1 - 250 y_m1_1 <= 0",
    " prod_link_2_m2_4: x_2_m2_4 - 250 y_m2_4 <= 0",
    " setup_excl_m1_1: y_m1_1 + s_m1_1 <= 1",
    " setup_excl_m2_3: y_m2_3 + s_m2_3 <= 1",
    " startup_m1_1: -y_m1_1 >= 0",
    " startup_m1_2: -y_m1_2 + y_m1_1 >= 0",
    " startup_m1_4: z_m1_1 - y_m1_4 + y_m1_3 >= 0",
    " startup_m2_4: z_m2_1 - y_m2_4 + y_m2_3 >= 0",
    " setup_dur_m1_1: s_m1_1 + s_m1_2 + s_m1_3 - 3 z_m1_1 >= 0",
    " setup_dur_m2_2: s_m2_2 + s_m2_3 + s_m2_4 - 3 z_m2_2 >= 0",
    "\\ --- HumanResource ---",
    " workforce_1: 3 y_m1_1 + 2 y_m2_1 <= 4",
    " workforce_4: 3 y_m1_4 + 2 y_m2_4 <= 4",
    "\\ --- BatchInventory ---",
    " batch_1_1: q_1_1 - 100 k_1_1 = 0",
    " batch_2_4: q_2_4 - 100 k_2_4 = 0",
    " min_batch_1_1: q_1_1 - 1000 u_1_1 >= 0",
    " activation_1_1: q_1_1 - 500 u_1_1 <= 0",
    " inv_cap_1_3: I_1_3 <= 500",
    " inv_cap_2_1: I_2_1 <= 400",
    "\\ --- CrossPeriod ---",
    " mach_cap_m1_1: x_1_m1_1 + x_2_m1_1 <= 250",
    " demand_total_1: x_1_m1_1 + x_1_m1_2 + x_1_m1_3 + x_1_m1_4 + x_1_m2_1 + x_1_m2_2 + x_1_m2_3 + x_1_m2_4 = 300",
    " demand_total_2: x_2_m1_1 + x_2_m1_2 + x_2_m1_3 + x_2_m1_4 + x_2_m2_1 + x_2_m2_2 + x_2_m2_3 + x_2_m2_4 = 200",
    "\\ --- SplitDelivery ---",
    " deliver_total_1: d_1_1 + d_1_2 + d_1_3 + d_1_4 = 300",
    " deliver_total_2: d_2_1 + d_2_2 + d_2_3 + d_2_4 = 200",
    " deliver_min_1_1: d_1_1 - 100 v_1_1 >= 0",
    " deliver_max_2_3: d_2_3 - 200 v_2_3 <= 0",
    " deliver_gap_1_1: v_1_1 + v_1_2 <= 1",
    " deliver_gap_2_3: v_2_3 + v_2_4 <= 1",
    " k_1_1 >= 0",
    " I_2_4 >= 0",
    " z_m1_3 = 0",
    " z_m2_4 = 0",
]


def golden_text() -> str:
    return serialize_lp(inject(canonical_base(), canonical_spec()))


# -- golden file ---------------------------------------------------------------------


def test_golden_file_matches_exactly():
    with open(GOLDEN, encoding="utf-8") as fh:
        assert golden_text() == fh.read()


def test_golden_contains_hand_derived_lines():
    lines = golden_text().splitlines()
    missing = [h for h in HAND_DERIVED if h not in lines]
    assert missing == []


def test_golden_row_counts_per_family():
    m = inject(canonical_base(), canonical_spec())
    count = {f: sum(c.group == f for c in m.constraints) for f in FAMILIES}
    # setup: 16 links + 8 exclusions + 8 start-ups + 4 duration windows
    assert count == {SETUP_TIME: 36, HUMAN_RESOURCE: 4, BATCH_INVENTORY: 32, CROSS_PERIOD: 10, SPLIT_DELIVERY: 24}


def test_setup_window_past_horizon_is_fixed_off():
    m = inject(canonical_base(), canonical_spec([SETUP_TIME]))
    for t in (3, 4):
        b = m.bound_of(f"z_m1_{t}")
        assert (b.lower, b.upper) == (0, 0)
    assert "setup_dur_m1_3" not in m.constraint_names


# -- preservation --------------------------------------------------------------------


@pytest.mark.parametrize("families", [(f,) for f in FAMILIES] + [FAMILIES])
def test_canonical_injection_preserves_base(families):
    base = canonical_base()
    assert preservation_problems(base, inject(base, canonical_spec(families))) == []


@pytest.mark.parametrize("family", FAMILIES)
def test_generated_specs_preserve_base(family):
    for seed in range(10):
        pair = generate_pair(GenConfig(seed=seed, family_weights={family: 1.0}))
        assert pair.spec.families == (family,)
        assert preservation_problems(parse_lp(pair.original_lp), parse_lp(pair.augmented_lp)) == []


@st.composite
def injection_cases(draw):
    n_items = draw(st.integers(1, 2))
    n_machines = draw(st.integers(1, 2))
    periods = draw(st.integers(1, 4))
    items = tuple(str(k) for k in range(1, n_items + 1))
    machines = tuple(f"m{k}" for k in range(1, n_machines + 1))
    demand = {i: float(draw(st.integers(0, 500))) for i in items}
    ctx = toy_context(items, machines, periods, demand, cap=float(draw(st.integers(1, 400))))
    fams = draw(st.lists(st.sampled_from(FAMILIES), min_size=1, max_size=5, unique=True))
    multiple = draw(st.integers(1, 50))
    spec = InjectionSpec(
        tuple(fams),
        ctx,
        SetupParams(draw(st.integers(1, 5))),
        LaborParams({m: draw(st.integers(0, 5)) for m in machines}, {t: draw(st.integers(0, 9)) for t in ctx.T}),
        BatchParams(multiple, multiple * draw(st.integers(1, 5)), {i: float(draw(st.integers(0, 900))) for i in items}),
        None,
        DeliveryParams(10.0, float(draw(st.integers(10, 600))), draw(st.integers(1, 3))),
        BigMPolicy(draw(st.sampled_from(["tight", "fixed"]))),
    )
    return ctx, spec


@settings(max_examples=60, suppress_health_check=[HealthCheck.too_slow])
@given(injection_cases())
def test_injection_only_adds(case):
    ctx, spec = case
    base = toy_base(ctx)
    augmented = inject(base, spec)
    assert preservation_problems(base, augmented) == []
    # the augmented model survives a text round trip
    assert parse_lp(serialize_lp(augmented)) == augmented


# -- interaction between families ----------------------------------------------------


def _rows(model, family):
    return [(c.name, c.expression, c.sense, c.rhs) for c in model.constraints if c.group == family]


@pytest.mark.parametrize("mode", ["tight", "fixed"])
def test_families_are_independent(mode):
    base = canonical_base()
    policy = BigMPolicy(mode, default=5000)
    together = inject(base, dataclasses.replace(canonical_spec(), big_m=policy))
    for fam in (SETUP_TIME, BATCH_INVENTORY, CROSS_PERIOD, SPLIT_DELIVERY):
        alone = inject(base, dataclasses.replace(canonical_spec([fam]), big_m=policy))
        assert _rows(together, fam) == _rows(alone, fam)


def test_workforce_alone_creates_its_own_linking():
    m = inject(canonical_base(), canonical_spec([HUMAN_RESOURCE]))
    assert "prod_link_1_m1_1" in m.constraint_names
    assert m.kind_of("y_m1_1") == "binary"


def test_second_state_family_reuses_operating_state():
    once = inject(canonical_base(), canonical_spec([HUMAN_RESOURCE]))
    twice = inject(once, canonical_spec([SETUP_TIME]))
    assert not any(v.startswith("y_") and "aug" in v for v in twice.variables)
    assert "startup_m1_4" in twice.constraint_names
    assert twice.metadata["state.y.families"] == "HumanResource,SetupTime"


def test_repeated_injection_gets_suffixed_names():
    base = canonical_base()
    once = inject(base, canonical_spec([BATCH_INVENTORY]))
    twice = inject(once, canonical_spec([BATCH_INVENTORY]))
    assert "batch_1_1_aug" in twice.constraint_names and "k_1_1_aug" in twice.variables
    thrice = inject(twice, canonical_spec([BATCH_INVENTORY]))
    assert "batch_1_1_aug2" in thrice.constraint_names
    assert twice.metadata["injected"] == "BatchInventory,BatchInventory"
    assert preservation_problems(once, twice) == []


def test_big_m_scale_doubles_every_constant():
    base = canonical_base()
    spec = canonical_spec([SETUP_TIME, BATCH_INVENTORY])
    one = inject(base, spec)
    two = inject(base, dataclasses.replace(spec, big_m=BigMPolicy(scale=2.0)))
    assert two.metadata["big_m.SetupTime"] == "500"
    assert two.metadata["big_m.BatchInventory"] == "1000"
    for name in ("prod_link_1_m1_1", "activation_2_3"):
        y = one.constraint(name).expression.terms[-1]
        assert two.constraint(name).expression.coefficient(y.var) == 2 * y.coef


def test_fixed_big_m_uses_default():
    m = inject(canonical_base(), dataclasses.replace(canonical_spec([SETUP_TIME]), big_m=BigMPolicy("fixed", 1e4)))
    assert m.constraint("prod_link_1_m1_1").expression.coefficient("y_m1_1") == -1e4


# -- errors --------------------------------------------------------------------------


def test_empty_spec_rejected():
    with pytest.raises(LPForgeError) as info:
        inject(canonical_base(), InjectionSpec((), canonical_context()))
    assert info.value.code == "EMPTY_SPEC"


def test_family_without_params_rejected():
    with pytest.raises(LPForgeError) as info:
        inject(canonical_base(), InjectionSpec((SETUP_TIME,), canonical_context()))
    assert info.value.code == "MISSING_PARAM"


def test_workforce_missing_machine_rejected():
    spec = dataclasses.replace(canonical_spec([HUMAN_RESOURCE]), labor=LaborParams({"m1": 1}, {t: 4 for t in range(1, 5)}))
    with pytest.raises(LPForgeError) as info:
        inject(canonical_base(), spec)
    assert info.value.code == "MISSING_PARAM"


def test_context_larger_than_model_rejected():
    small = toy_base(toy_context(periods=2))
    big = toy_context(periods=3)
    with pytest.raises(LPForgeError) as info:
        inject(small, InjectionSpec((CROSS_PERIOD,), big))
    assert info.value.code == "PATTERN_UNRESOLVED"


@pytest.mark.parametrize(
    "make",
    [
        lambda: SetupParams(0),
        lambda: BatchParams(100, 150, {}),
        lambda: DeliveryParams(0, 5),
        lambda: DeliveryParams(6, 5),
        lambda: DeliveryParams(1, 5, 0),
        lambda: BigMPolicy("loose"),
        lambda: InjectionSpec(("Overtime",), canonical_context()),
    ],
)
def test_invalid_parameters_rejected(make):
    with pytest.raises(LPForgeError) as info:
        make()
    assert info.value.code == "INVALID_PARAM"


def test_delivery_count_warning_reported():
    ctx = toy_context(periods=2, demand={"1": 1000.0}, cap=1000.0)
    spec = InjectionSpec((SPLIT_DELIVERY,), ctx, delivery=DeliveryParams(10, 100, 1))
    _, diags = inject_with_report(toy_base(ctx), spec)
    assert diags and all(not d.is_error for d in diags)


# -- effect on the optimum -----------------------------------------------------------


def _small_cases():
    ctx = toy_context(items=("1",), machines=("m1", "m2"), periods=3, demand={"1": 20.0}, cap=10.0)
    costs_base = toy_base(ctx)
    yield costs_base, InjectionSpec((BATCH_INVENTORY,), ctx, batch=BatchParams(5, 15, {"1": 30.0}))
    yield costs_base, InjectionSpec((HUMAN_RESOURCE,), ctx, labor=LaborParams({"m1": 2, "m2": 2}, {1: 2, 2: 2, 3: 4}))
    yield costs_base, InjectionSpec((SPLIT_DELIVERY,), ctx, delivery=DeliveryParams(5, 15, 2))
    yield costs_base, InjectionSpec((CROSS_PERIOD,), ctx)
    yield costs_base, InjectionSpec((SETUP_TIME,), ctx, setup=SetupParams(1))


@pytest.mark.parametrize("base, spec", list(_small_cases()), ids=lambda x: getattr(x, "families", [""])[0])
def test_added_rows_never_improve_the_optimum(base, spec):
    z0 = solve(base)
    z1 = solve(inject(base, spec))
    assert z0.status == OPTIMAL
    assert z1.status in (OPTIMAL, INFEASIBLE)
    if z1.status == OPTIMAL:
        assert z1.objective >= z0.objective


def test_setup_pushes_production_later():
    ctx = toy_context(periods=3, demand={"1": 10.0}, cap=10.0)
    base = toy_base(ctx)
    sol = solve(inject(base, InjectionSpec((SETUP_TIME,), ctx, setup=SetupParams(2))))
    assert sol.status == OPTIMAL
    assert sol.assignment["x_1_m1_3"] == 10
    assert sol.assignment["s_m1_1"] == sol.assignment["s_m1_2"] == 1


# -- descriptions and config form ----------------------------------------------------


def test_description_names_every_family_once():
    text = describe_spec(canonical_spec(), seed=3)
    for fam in FAMILIES:
        assert text.count(DISPLAY_NAMES[fam] + ":") == 1


def test_description_is_deterministic_per_seed():
    spec = canonical_spec()
    assert describe_spec(spec, 7) == describe_spec(spec, 7)
    variants = {describe_spec(spec, s) for s in range(20)}
    assert len(variants) > 1


def test_description_mentions_parameters():
    text = describe_spec(canonical_spec([SPLIT_DELIVERY, BATCH_INVENTORY]), seed=0)
    for token in ("100", "200", "1000"):
        assert token in text


def test_spec_config_round_trip():
    spec = canonical_spec()
    again = spec_from_config(spec_to_config(spec), canonical_base())
    assert inject(canonical_base(), again) == inject(canonical_base(), spec)


def test_injection_is_deterministic():
    rng = random.Random(0)
    fams = tuple(rng.sample(FAMILIES, 3))
    assert serialize_lp(inject(canonical_base(), canonical_spec(fams))) == serialize_lp(
        inject(canonical_base(), canonical_spec(fams))
    )
