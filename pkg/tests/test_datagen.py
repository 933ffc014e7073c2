import json
import random
import re

import pytest

from helpers import check_pair
from lpforge.datagen import (
    CLASSIC_PRESET,
    GenConfig,
    ParamRanges,
    derive_seed,
    downscale_instance,
    generate_base_model,
    generate_dataset,
    generate_pair,
    mutate_for_repair,
    pair_seed,
    regenerate_from_manifest,
    sample_spec,
    transfer_labels,
    write_dataset,
)
from lpforge.errors import LPForgeError
from lpforge.injection import SETUP_TIME, SPLIT_DELIVERY, SchedulingContext
from lpforge.lp import parse_lp, serialize_lp
from lpforge.pruning import label_prunable
from lpforge.solver.core import OPTIMAL, solve


def test_derive_seed_is_stable_and_label_sensitive():
    assert derive_seed(1, "a") == derive_seed(1, "a")
    assert derive_seed(1, "a") != derive_seed(1, "b")
    assert derive_seed(1, "a") != derive_seed(2, "a")
    assert 0 <= derive_seed(5, "x", 3) < 2 ** 64


def test_base_model_variable_counts():
    m = generate_base_model(GenConfig(seed=0))
    names = m.variables
    assert sum(bool(re.fullmatch(r"x_\d+_m\d+_\d+", v)) for v in names) == 16
    assert sum(bool(re.fullmatch(r"q_\d+_\d+", v)) for v in names) == 8


def test_base_model_is_byte_identical_per_seed():
    cfg = GenConfig(seed=12)
    assert serialize_lp(generate_base_model(cfg)) == serialize_lp(generate_base_model(cfg))
    assert serialize_lp(generate_base_model(cfg)) != serialize_lp(generate_base_model(cfg.with_seed(13)))


def test_zero_demand_gives_zero_cost():
    sol = solve(generate_base_model(GenConfig(seed=0, demand_range=(0, 0))))
    assert sol.status == OPTIMAL and sol.objective == 0


def test_impossible_demand_exhausts_retries():
    cfg = GenConfig(seed=0, demand_range=(5000, 5000), capacity_range=(1, 1), max_retries=2)
    with pytest.raises(LPForgeError) as info:
        generate_base_model(cfg)
    assert info.value.code == "GEN_EXHAUSTED"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_items": 0},
        {"demand_range": (5, 1)},
        {"family_weights": {"SetupTime": 1.5}},
        {"family_weights": {"SetupTime": 0.0}},
        {"mutation_rates": {"NOPE": 1.0}},
        {"param_ranges": ParamRanges(interval=(3, 1))},
    ],
)
def test_invalid_config_rejected(kwargs):
    with pytest.raises(LPForgeError) as info:
        GenConfig(**kwargs)
    assert info.value.code == "INVALID_CONFIG"


def test_config_dict_round_trip():
    cfg = GenConfig(seed=4, param_ranges=CLASSIC_PRESET, family_weights={SETUP_TIME: 1.0})
    assert GenConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


# -- pairs ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(25))
def test_pairs_satisfy_invariants(seed):
    assert check_pair(generate_pair(GenConfig(seed=seed))) == []


def test_setup_only_weights_add_setup_variables_only():
    pair = generate_pair(GenConfig(seed=3, family_weights={SETUP_TIME: 1.0}))
    base, aug = parse_lp(pair.original_lp), parse_lp(pair.augmented_lp)
    added = set(aug.variables) - set(base.variables)
    assert added and {v.split("_")[0] for v in added} == {"s", "y", "z"}


def test_pair_is_deterministic():
    cfg = GenConfig(seed=21)
    a, b = generate_pair(cfg), generate_pair(cfg)
    assert (a.original_lp, a.description, a.augmented_lp) == (b.original_lp, b.description, b.augmented_lp)


def test_sampled_delivery_bounds_fit_the_horizon():
    cfg = GenConfig(seed=0, family_weights={SPLIT_DELIVERY: 1.0})
    ctx = SchedulingContext.from_model(generate_base_model(cfg))
    for k in range(50):
        spec = sample_spec(ctx, cfg, random.Random(k))
        p = spec.delivery
        slots = -(-ctx.periods // p.interval)
        assert p.d_min <= p.d_max
        assert p.d_max * slots >= max(ctx.demand.values())


def test_classic_preset_uses_fixed_numbers():
    cfg = GenConfig(seed=1, param_ranges=CLASSIC_PRESET, family_weights={SETUP_TIME: 1.0, "BatchInventory": 1.0})
    spec = generate_pair(cfg).spec
    assert spec.setup.duration == 3
    assert (spec.batch.multiple, spec.batch.min_batch) == (100, 1000)


def test_feasibility_screen_yields_solvable_pairs():
    cfg = GenConfig(seed=0, n_items=1, n_machines=1, n_periods=3, feasibility_screen_nodes=50)
    for seed in range(3):
        pair = generate_pair(cfg.with_seed(seed))
        assert solve(parse_lp(pair.augmented_lp)).status == OPTIMAL


def test_dataset_written_and_regenerated(tmp_path):
    cfg = GenConfig(seed=7)
    pairs = generate_dataset(cfg, 4)
    assert [p.pair_id for p in pairs] == [f"{k:05d}" for k in range(4)]
    assert [p.seed for p in pairs] == [pair_seed(7, k) for k in range(4)]
    path = write_dataset(str(tmp_path), cfg, pairs)
    with open(path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    again = regenerate_from_manifest(manifest)
    for p, q in zip(pairs, again):
        assert (p.pair_id, p.original_lp, p.description, p.augmented_lp) == (q.pair_id, q.original_lp, q.description, q.augmented_lp)
    assert (tmp_path / "00002" / "augmented.lp").read_text(encoding="utf-8") == pairs[2].augmented_lp


def test_parallel_generation_matches_serial():
    cfg = GenConfig(seed=3)
    serial = generate_dataset(cfg, 4)
    parallel = generate_dataset(cfg, 4, jobs=2)
    assert [p.augmented_lp for p in serial] == [p.augmented_lp for p in parallel]


# -- downscaling ---------------------------------------------------------------------


def _items_in(names):
    out = set()
    for v in names:
        m = re.fullmatch(r"(?:x|q|k|u|I|d|v)_(\w+?)_.*", v)
        if m:
            out.add(m.group(1))
    return out


def test_full_fraction_is_identity():
    m = generate_base_model(GenConfig(seed=0))
    small, name_map = downscale_instance(m, 1.0, seed=0)
    assert small is m
    assert name_map == {v: v for v in m.variables}


def test_too_small_fraction_rejected():
    m = generate_base_model(GenConfig(seed=0))
    with pytest.raises(LPForgeError) as info:
        downscale_instance(m, 0.0, seed=0)
    assert info.value.code == "INVALID_PARAM"


@pytest.mark.parametrize("seed", range(5))
def test_downscale_leaves_no_dropped_item_behind(seed):
    cfg = GenConfig(seed=seed, n_items=4)
    aug = parse_lp(generate_pair(cfg).augmented_lp)
    small, name_map = downscale_instance(aug, 0.5, seed)
    kept = small.metadata["items"].split(",")
    assert len(kept) == 2
    assert _items_in(small.variables) <= set(kept)
    assert set(name_map) == set(small.variables)
    for c in small.constraints:
        assert set(c.expression.variables) <= set(small.variables)


def test_downscale_scales_capacity_by_demand_share():
    m = generate_base_model(GenConfig(seed=5, n_items=4))
    small, _ = downscale_instance(m, 0.5, seed=5)
    demand = {k: float(v) for k, v in (p.split(":") for p in m.metadata["demand"].split(","))}
    share = sum(demand[i] for i in small.metadata["items"].split(",")) / sum(demand.values())
    assert small.constraint("cap_m1_1").rhs == pytest.approx(m.constraint("cap_m1_1").rhs * share)


def test_downscaled_instances_mostly_feasible():
    statuses = []
    for seed in range(20):
        m = generate_base_model(GenConfig(seed=seed, n_items=4))
        small, _ = downscale_instance(m, 0.5, seed)
        statuses.append(solve(small).status)
    assert statuses.count(OPTIMAL) >= 19


def test_transfer_then_recertify():
    m = generate_base_model(GenConfig(seed=8, n_items=3, n_machines=2, n_periods=3))
    small, name_map = downscale_instance(m, 0.5, seed=8)
    carried = transfer_labels(label_prunable(m), name_map)
    direct = label_prunable(small)
    assert carried.stale and not direct.stale
    assert set(carried.labels) == set(direct.labels)


def test_identity_transfer_keeps_labels():
    m = generate_base_model(GenConfig(seed=1, n_items=2, n_machines=2, n_periods=3))
    labels = label_prunable(m)
    carried = transfer_labels(labels, {v: v for v in m.variables})
    assert dict(carried.labels) == dict(labels.labels)


# -- repair corpus -------------------------------------------------------------------


def test_end_deletion_expects_missing_end():
    cfg = GenConfig(seed=0, mutation_rates={"MISSING_END": 1.0}, mutation_count=(1, 1))
    text = serialize_lp(generate_base_model(cfg))
    broken, expected = mutate_for_repair(text, cfg)
    assert expected == {"MISSING_END"}
    assert "End" not in broken.split("\n")


def test_sense_mutation_expects_sense_rule():
    cfg = GenConfig(seed=0, mutation_rates={"SENSE_TOKEN": 1.0}, mutation_count=(1, 1))
    broken, expected = mutate_for_repair(serialize_lp(generate_base_model(cfg)), cfg)
    assert expected == {"SENSE_TOKEN"}
    assert broken != serialize_lp(generate_base_model(cfg))
