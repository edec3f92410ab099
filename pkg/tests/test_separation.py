import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quickassort.choice import cc_transform
from quickassort.formulations import VarMap
from quickassort.instance import Segment
from quickassort.separation import (
    OVER,
    UNDER,
    Cut,
    CutPool,
    cut_to_row,
    over_value,
    separate_over,
    separate_segment,
    separate_under,
    under_value,
)

from hull_tools import random_segment, random_y, scaled_over, scaled_under, subsets_without, vertex_points

SEG = Segment(0, 1.0, 1.0, np.ones(2), np.array([1.0, 2.0]))
Y = np.array([0.25, 0.20])
# x_1, y0, y_1, y_2 as model columns 0..3
VM = VarMap(x=np.array([0, 4]), y0=np.array([1]), y=np.array([[2, 3]]))


def test_fractional_point_under_cut():
    cut = separate_under(SEG, 0, 0.95, 0.35, Y)
    assert cut.S == () and cut.kind == UNDER
    assert cut.violation == pytest.approx(0.025, abs=1e-12)
    # the alternative S = {2} is not violated
    assert under_value(SEG, 0, (1,), 0.95, 0.35, Y) < 0


def test_fractional_point_over_prefix_and_value():
    assert separate_over(SEG, 0, 0.95, 0.35, Y) is None
    # T* = {2}: y_2 = 0.2 >= y0 - y_1 = 0.1, RHS 0.3125
    assert over_value(SEG, 0, (1,), 0.95, 0.35, Y) == pytest.approx(0.25 - 0.3125)
    cut = separate_over(SEG, 0, 0.95, 0.35, Y, tol=-np.inf)
    assert cut.S == (1,)


def test_cut_rows():
    row = cut_to_row(separate_under(SEG, 0, 0.95, 0.35, Y), SEG, VM)
    coef = dict(zip(row.idx.tolist(), row.val.tolist()))
    assert coef == {2: 2.0, 3: 2.0, 0: -1.0} and row.sense == ">="
    # Under at S = N - j is y_j >= alpha(N) x_j
    row = cut_to_row(Cut(0, 0, (1,), UNDER, 0.0), SEG, VM)
    assert dict(zip(row.idx.tolist(), row.val.tolist())) == {2: 4.0, 0: -1.0}
    # Over at S = {} is y_j <= alpha(j) x_j
    row = cut_to_row(Cut(0, 0, (), OVER, 0.0), SEG, VM)
    assert dict(zip(row.idx.tolist(), row.val.tolist())) == {2: 2.0, 0: -1.0} and row.sense == "<="


def test_zero_offer_level_never_under_cut():
    rng = np.random.default_rng(0)
    for _ in range(200):
        seg = random_segment(rng, 6)
        y0, y = random_y(rng, seg, 1)
        for j in range(6):
            assert separate_under(seg, j, 0.0, y0[0], y[0]) is None


def test_over_cut_when_unoffered_product_has_full_mass():
    seg = Segment(0, 1.0, 1.0, np.ones(2), np.array([1.0, 1.0]))
    y0 = 1.0 / 3.0
    cut = separate_over(seg, 0, 0.0, y0, np.array([y0, y0]))
    assert cut is not None and cut.kind == OVER and cut.violation > 0


@given(seed=st.integers(0, 10_000), n=st.integers(1, 9))
def test_vertices_are_never_cut(seed, n):
    seg = random_segment(np.random.default_rng(seed), n)
    masks, y0, y = vertex_points(seg)
    for k in range(len(masks)):
        x = masks[k].astype(float)
        assert separate_segment(0, seg, x, y0[k], y[k]) == []
        # an unoffered x_j = 1 is still fine for Over
        assert not separate_segment(0, seg, np.ones(n), y0[k], y[k], under=False, over=True)


@given(seed=st.integers(0, 10_000), n=st.integers(2, 12))
def test_prefix_attains_maximum_scaled_violation(seed, n):
    rng = np.random.default_rng(seed)
    seg = random_segment(rng, n)
    y0, y = random_y(rng, seg, 1)
    y0, y = float(y0[0]), y[0]
    j = int(rng.integers(n))
    xj = float(rng.uniform())
    S_all = subsets_without(n, j)
    for sep, scaled, plain in ((separate_under, scaled_under, under_value), (separate_over, scaled_over, over_value)):
        cut = sep(seg, j, xj, y0, y, tol=-np.inf)
        assert j not in cut.S and list(cut.S) == sorted(cut.S)
        S_cut = np.isin(np.arange(n), cut.S)[None, :]
        best = scaled(seg, j, xj, y0, y, S_all).max()
        assert scaled(seg, j, xj, y0, y, S_cut)[0, 0] >= best - 1e-9
        # reported violation is the unscaled gap at the returned S
        assert cut.violation == pytest.approx(plain(seg, j, cut.S, xj, y0, y), abs=1e-12)
        # the verdict agrees with brute force
        assert (sep(seg, j, xj, y0, y) is not None) == (cut.violation > 1e-7)
        if best <= 0:
            assert cut.violation <= 1e-12


@given(seed=st.integers(0, 10_000))
def test_row_activity_matches_violation(seed):
    rng = np.random.default_rng(seed)
    n = 5
    seg = random_segment(rng, n)
    y0, y = random_y(rng, seg, 1)
    x = rng.uniform(size=n)
    vm = VarMap(x=np.arange(n), y0=np.array([n]), y=np.arange(n + 1, 2 * n + 1)[None, :])
    point = np.concatenate([x, y0, y[0]])
    for cut in separate_segment(0, seg, x, float(y0[0]), y[0]):
        row = cut_to_row(cut, seg, vm)
        lo, hi = row.bounds()
        act = row.activity(point)
        assert act < lo - 1e-12 or act > hi + 1e-12  # the row cuts the point off


def test_segment_cuts_sorted_and_pool_dedups():
    rng = np.random.default_rng(4)
    seg = random_segment(rng, 6)
    y0, y = random_y(rng, seg, 1)
    x = rng.uniform(size=6)
    cuts = separate_segment(2, seg, x, float(y0[0]), y[0])
    assert [(c.j, c.kind) for c in cuts] == sorted((c.j, c.kind) for c in cuts)
    assert all(c.segment == 2 for c in cuts)
    pool = CutPool()
    assert all(pool.add(c) for c in cuts)
    assert not any(pool.add(c) for c in cuts)
    assert len(pool) == len(cuts)


def test_cc_points_tight_over_at_empty():
    seg = Segment(0, 1.0, 1.0, np.ones(3), np.array([1.0, 2.0, 3.0]))
    p = cc_transform(seg, [0, 2])
    assert over_value(seg, 0, (), 1.0, p.y0, p.y) <= 1e-12
