import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quickassort.heuristics import enum_online, improved_ro, two_step_ro
from quickassort.instance import (
    OfflineConstraint,
    PartialOrder,
    Segment,
    from_arrays,
    generate_partial_orders,
    generate_synthetic,
    with_offline_constraint,
    with_orders,
)
from quickassort.oracle import brute_force_qap
from quickassort.solver import solve_qap

from conftest import small_instance


def one_based(sol):
    return [sorted(j + 1 for j in s) for s in sol.sets]


def test_two_step_ro_ro_failure_toy(toy):
    sol = two_step_ro(toy)
    assert one_based(sol) == [[1], [1], [1]]
    assert sol.objective == pytest.approx(7.9406, abs=1e-4)
    assert sol.method == "RO"


def test_gap_toy_heuristics(gap_toy):
    ro = two_step_ro(gap_toy)
    assert one_based(ro) == [[1], [1], [1]]
    assert ro.objective == pytest.approx(15.528, abs=1e-3)
    iro = improved_ro(gap_toy)
    assert one_based(iro) == [[1, 2, 3], [3], [1, 2, 3]]
    assert iro.objective == pytest.approx(15.7226, abs=1e-4)


def test_improved_ro_not_worse_on_ro_failure_toy(toy):
    assert improved_ro(toy).objective >= two_step_ro(toy).objective


def test_offline_only_matches_exact():
    rng = np.random.default_rng(0)
    inst = from_arrays([1.0], 1.0, [rng.uniform(1, 20, 7)], [rng.uniform(0.1, 3, 7)])
    assert two_step_ro(inst).objective == pytest.approx(solve_qap(inst).objective, abs=1e-9)


def test_enum_online_stops_on_drop():
    seg = Segment(1, 1.0, 1.0, np.array([10.0, 9.0, 1.0]), np.array([1.0, 1.0, 5.0]))
    mask, rev = enum_online(seg, None, np.ones(3, dtype=bool))
    assert mask.tolist() == [True, True, False]
    assert rev == pytest.approx(19 / 3)


def test_enum_online_luce_scans_past_a_plateau():
    # product 1 dominates product 2, so the second prefix adds nothing; the third pays off
    seg = Segment(1, 1.0, 1.0, np.array([10.0, 9.0, 8.0]), np.array([1.0, 100.0, 1.0]))
    order = PartialOrder(3, ((0, 1),))
    mask, rev = enum_online(seg, order, np.ones(3, dtype=bool))
    assert mask.tolist() == [True, False, True]
    assert rev == pytest.approx(6.0)


def test_linear_constraint_rejected(toy):
    inst = with_offline_constraint(toy, OfflineConstraint.linear([[1.0, 1.0, 1.0]], [2.0]))
    for h in (two_step_ro, improved_ro):
        with pytest.raises(ValueError, match="solve_qap"):
            h(inst)


@given(seed=st.integers(0, 10_000), luce=st.booleans(), card=st.booleans())
def test_heuristics_feasible_and_bounded(seed, luce, card):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    m = int(rng.integers(1, min(n, 3) + 1))
    inst = small_instance(seed, n, m, luce=luce, K=max(1, n // 3) if card else None)
    opt = brute_force_qap(inst).objective
    ro, iro = two_step_ro(inst), improved_ro(inst)
    for sol in (ro, iro):
        assert sol.check(inst) == []
        assert sol.objective <= opt + 1e-9
    if not card:
        assert iro.objective >= ro.objective - 1e-12


@pytest.mark.slow
def test_gap_grows_with_cardinality_and_luce():
    """Aggregate over 12 seeds and two offline shares at (n, m) = (50, 10)."""
    n, m = 50, 10
    means = {}
    for luce in (False, True):
        for card in (False, True):
            gaps = []
            for alpha0 in (0.1, 0.5):
                for s in range(12):
                    inst = generate_synthetic(n, m, alpha0, 5.0, seed=s)
                    if luce:
                        inst = with_orders(inst, generate_partial_orders(n, m, seed=s))
                    if card:
                        inst = with_offline_constraint(inst, OfflineConstraint.cardinality(n // 10))
                    opt = solve_qap(inst).objective
                    gaps.append((opt - improved_ro(inst).objective) / opt)
            assert min(gaps) >= -1e-6
            means[luce, card] = float(np.mean(gaps))
    assert means[False, True] + means[True, True] >= means[False, False] + means[True, False]
    assert means[True, False] + means[True, True] >= means[False, False] + means[False, True]
