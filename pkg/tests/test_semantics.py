"""Injected rows admit exactly the intended schedules, checked by enumeration."""

from fractions import Fraction

from semantics import batch_cases, delivery_cases, setup_window_cases, short_horizon_production, workforce_cases


def test_production_only_after_full_setup_window():
    _, feasible, violations = setup_window_cases(periods=4, duration=2)
    assert violations == []
    starts = {t for vals in feasible for t in range(1, 5) if vals[f"y_m1_{t}"]}
    # a two-period setup occupies periods 1 and 2 at the earliest
    assert starts == {3, 4}


def test_setup_and_production_never_share_a_period():
    _, feasible, _ = setup_window_cases(periods=4, duration=1)
    assert all(not (v[f"s_m1_{t}"] and v[f"y_m1_{t}"]) for v in feasible for t in range(1, 5))


def test_horizon_shorter_than_setup_forbids_production():
    assert short_horizon_production(periods=2, duration=3) is False


def test_workforce_never_exceeded():
    feasible, violations = workforce_cases()
    assert violations == []
    assert sorted(feasible) == [(0, 0), (0, 1), (1, 0)]


def test_zero_workforce_idles_every_machine():
    feasible, _ = workforce_cases(R=0)
    assert feasible == [(0, 0)]


def test_ample_workforce_allows_both_machines():
    feasible, _ = workforce_cases(R=5)
    assert (1, 1) in feasible


def test_batches_are_multiples_above_minimum():
    feasible, violations = batch_cases(multiple=10, min_batch=30, cap=100.0)
    assert violations == []
    assert sorted({q for q, _, _ in feasible}) == [Fraction(q) for q in (0, 30, 40, 50, 60, 70, 80, 90, 100)]


def test_deliveries_cover_demand_with_spacing():
    feasible, violations = delivery_cases(demand=2000, d_min=500, d_max=1500, interval=2, periods=3)
    assert violations == []
    assert {v for v, _ in feasible} == {(1, 0, 1)}
    assert all(sum(d) == 2000 for _, d in feasible)


def test_delivery_interval_one_allows_adjacent_periods():
    feasible, violations = delivery_cases(demand=1000, d_min=250, d_max=750, interval=1, periods=2)
    assert violations == []
    assert {v for v, _ in feasible} == {(1, 1)}
