import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quickassort.choice import cc_transform
from quickassort.formulations import build_idm_lp, under_row
from quickassort.idm import (
    IdmPoint,
    brute_force_idm,
    build_rounding,
    generate_idm,
    idm_objective,
    sample_assortment,
    sample_assortments,
    solve_qap_idm,
)
from quickassort.instance import IdmInstance, from_arrays
from quickassort.lp.bnb import make_session
from quickassort.lp.model import Row


def single_product():
    base = from_arrays([0.5, 0.5], 1.0, [[10.0], [10.0]], [[1.0], [1.0]])
    return IdmInstance(base, np.array([[0.3]]))


def test_single_product_value():
    idm = single_product()
    point = solve_qap_idm(idm)
    assert point.objective == pytest.approx(4.0, abs=1e-9)
    dist = build_rounding(idm, point)
    assert dist.expected_revenue(idm) == pytest.approx(4.0, abs=1e-9)
    assert dist.inclusion(1) == pytest.approx([1.0])


def test_two_products_with_precedence():
    # product 2 carries the online demand, but offering it requires offering product 1
    base = from_arrays([0.5, 0.5], 1.0, [[2.0, 8.0], [2.0, 8.0]], [[1.0, 1.0], [1.0, 1.0]])
    idm = IdmInstance(base, np.array([[0.01, 0.5]]), ((0, 1),))
    point = solve_qap_idm(idm)
    _, ref = brute_force_idm(idm)
    candidates = {(), (0,), (0, 1)}
    assert point.objective == pytest.approx(ref, abs=1e-9)
    assert point.y[0] >= point.y[1] - 1e-9
    assert point.x[0] >= point.x[1] - 1e-9
    dist = build_rounding(idm, point)
    for s, p in zip(dist.sets, dist.probs):
        if p > 0:
            assert tuple(sorted(s)) in candidates


@settings(max_examples=30)
@given(seed=st.integers(0, 10_000))
def test_lp_equals_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    m = int(rng.integers(1, min(n, 3) + 1))
    idm = generate_idm(n, m, seed, arc_prob=float(rng.choice([0.0, 0.2, 0.5])))
    point = solve_qap_idm(idm)
    _, ref = brute_force_idm(idm)
    assert point.objective == pytest.approx(ref, abs=1e-6)
    assert point.objective == pytest.approx(idm_objective(idm, point.x, point.y), abs=1e-12)


@settings(max_examples=30)
@given(seed=st.integers(0, 10_000))
def test_rounding_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    idm = generate_idm(n, min(n, 2), seed, arc_prob=0.3)
    point = solve_qap_idm(idm)
    dist = build_rounding(idm, point)
    off = idm.base.offline
    assert np.all(dist.probs >= 0)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-9)
    assert all(a <= b for a, b in zip(dist.sets, dist.sets[1:]))  # nested
    assert all(idm.precedence_closed(s) for s in dist.sets)
    assert dist.inclusion(n) == pytest.approx(point.x, abs=1e-7)
    y0 = sum(p * cc_transform(off, sorted(s)).y0 for s, p in zip(dist.sets, dist.probs))
    y = sum(p * cc_transform(off, sorted(s)).y for s, p in zip(dist.sets, dist.probs))
    assert y0 == pytest.approx(point.y0, abs=1e-7)
    assert y == pytest.approx(point.y, abs=1e-7)
    assert dist.expected_revenue(idm) == pytest.approx(point.objective, abs=1e-7)


@given(seed=st.integers(0, 10_000), data=st.data())
def test_cc_point_gives_degenerate_distribution(seed, data):
    idm = generate_idm(5, 2, seed, arc_prob=0.0)
    S = data.draw(st.sets(st.integers(0, 4)))
    cc = cc_transform(idm.base.offline, sorted(S))
    x = np.isin(np.arange(5), sorted(S)).astype(float)
    point = IdmPoint(x, cc.y0, cc.y, idm_objective(idm, x, cc.y))
    dist = build_rounding(idm, point)
    support = [s for s, p in zip(dist.sets, dist.probs) if p > 1e-12]
    assert support == [frozenset(S)]
    assert all(sample_assortment(dist, k) == frozenset(S) for k in range(20))


def test_flat_point_puts_mass_on_full_set():
    base = from_arrays([1.0], 1.0, [[3.0, 4.0, 5.0]], [[1.0, 2.0, 1.0]])
    idm = IdmInstance(base, np.zeros((0, 3)))
    cc = cc_transform(base.offline, [0, 1, 2])
    dist = build_rounding(idm, IdmPoint(np.ones(3), cc.y0, cc.y, 0.0))
    assert dist.probs[-1] == pytest.approx(1.0)
    assert dist.probs[1:-1] == pytest.approx(np.zeros(2))


def test_tied_values_respect_precedence():
    # y_1 = y_2 with the arc pointing from the higher index to the lower
    base = from_arrays([1.0], 1.0, [[3.0, 3.0]], [[1.0, 1.0]])
    idm = IdmInstance(base, np.zeros((0, 2)), ((1, 0),))
    cc = cc_transform(base.offline, [0, 1])
    dist = build_rounding(idm, IdmPoint(np.ones(2), cc.y0, cc.y, 0.0))
    assert dist.order == [1, 0]
    assert all(idm.precedence_closed(s) for s in dist.sets)


def test_non_optimal_point_rejected():
    idm = single_product()
    point = solve_qap_idm(idm)
    slack = IdmPoint(point.x * 0.5, point.y0, point.y, point.objective)
    with pytest.raises(ValueError, match="point not LP-optimal"):
        build_rounding(idm, slack)


def test_sampling_matches_inclusion_and_closure():
    idm = generate_idm(8, 3, 11, arc_prob=0.4)
    dist = build_rounding(idm, solve_qap_idm(idm))
    N = 100_000
    draws = sample_assortments(dist, 5, N)
    assert np.array_equal(draws, sample_assortments(dist, 5, N))
    masks = np.array([[j in s for j in range(8)] for s in dist.sets])
    freq = masks[draws].mean(axis=0)
    p = dist.inclusion(8)
    sd = np.sqrt(p * (1 - p) / N)
    assert np.all(np.abs(freq - p) <= 3 * sd + 1e-12)
    for k in np.unique(draws):
        assert idm.precedence_closed(dist.sets[k])


def test_negative_revenue_refused():
    base = from_arrays([0.5, 0.5], 1.0, [[1.0, 1.0], [1.0, -2.0]], [[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        solve_qap_idm(IdmInstance(base, np.full((1, 2), 0.2)))


def test_distribution_json():
    idm = single_product()
    dist = build_rounding(idm, solve_qap_idm(idm))
    doc = json.loads(json.dumps(dist.to_dict()))
    assert doc["support"][0] == [[], pytest.approx(0.0, abs=1e-12)]
    assert doc["support"][1] == [[1], pytest.approx(1.0)]


# ------------------------------------------------------------ shared offer set


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000))
def test_shared_revenue_single_segment_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 11))
    r = rng.uniform(1, 20, n)
    base = from_arrays([0.6, 0.4], rng.uniform(0.5, 3), [r, r], [rng.uniform(0.1, 3, n), np.ones(n)])
    order = rng.permutation(n)
    arcs = tuple((int(order[a]), int(order[b])) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.25)
    idm = IdmInstance(base, rng.uniform(0.05, 0.5, (1, n)), arcs)
    _, ref = brute_force_idm(idm)
    assert solve_qap_idm(idm).objective == pytest.approx(ref, abs=1e-6)


def _full_under_model(idm: IdmInstance, split: bool):
    """IDM LP with every Under row; ``split`` moves the online value to ``z <= x``."""
    model, vm = build_idm_lp(idm)
    off = idm.base.offline
    n = idm.n
    rows = []
    for j in range(n):
        rest = [t for t in range(n) if t != j]
        for k in range(n):
            for S in itertools.combinations(rest, k):
                rows.append(under_row(off, j, S, int(vm.x[j]), int(vm.y0[0]), vm.y[0]))
    model.add_rows(rows)
    if split:
        online = idm.online_value()
        for j in range(n):
            z = model.add_var(f"z{j + 1}", obj=online[j])
            model.set_objective(int(vm.x[j]), 0.0)
            model.add_row(Row(np.array([z, vm.x[j]]), np.array([1.0, -1.0]), "<=", 0.0))
    return model


@settings(max_examples=25)
@given(seed=st.integers(0, 10_000))
def test_separate_online_offer_gives_same_optimum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    idm = generate_idm(n, min(n, 2), seed, arc_prob=0.3)
    tied = make_session(_full_under_model(idm, split=False)).solve().objective
    split = make_session(_full_under_model(idm, split=True)).solve().objective
    assert split == pytest.approx(tied, abs=1e-7)
    assert tied == pytest.approx(solve_qap_idm(idm).objective, abs=1e-7)
