import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_instance
from wlrand import (
    SegmentMap,
    WeakLabels,
    build_contingency,
    count_a,
    count_b,
    count_c,
    count_d,
    naive_pair_counts,
    pair_counts,
    wl_rand,
)
from wlrand.wl_index import DegenerateLabelsError, PairCountCapError


def _ml_table(seg, ml):
    return build_contingency(SegmentMap(seg), ml)


def loop_counts(seg, ml, cl):
    """Pixel-pair loops in plain Python, one pass per defining sum."""
    s, m, c = (np.asarray(g).ravel().tolist() for g in (seg, ml, cl))
    n = len(s)
    a = c_ = d = b_lit = b_sep = 0
    for i, j in itertools.combinations(range(n), 2):
        if m[i] and m[i] == m[j]:
            if s[i] == s[j]:
                a += 1
            else:
                c_ += 2
    for i, j in itertools.permutations(range(n), 2):
        if c[i] and c[j] and c[i] != c[j]:
            b_lit += 1
            if s[i] == s[j]:
                d += 1
            else:
                b_sep += 1
    return dict(a=a, c=c_, d=d, b_literal=b_lit, b_separation=b_sep)


# ------------------------------------------------------------ worked examples


def test_count_a_examples():
    ml = np.ones((2, 2), int)
    assert count_a(_ml_table(np.ones((2, 2), int), ml)) == 6
    assert count_a(_ml_table(np.arange(4).reshape(2, 2), ml)) == 0


def test_count_c_examples():
    ml = np.ones((2, 2), int)
    assert count_c(_ml_table(np.ones((2, 2), int), ml)) == 0
    # four singletons: each contributes (4 - 1) * 1
    assert count_c(_ml_table(np.arange(4).reshape(2, 2), ml)) == 12


CL_TWO_BY_TWO = np.array([[1, 1, 2, 2]])


def test_count_b_and_d_one_shared_segment():
    ct = build_contingency(SegmentMap(np.ones((1, 4), int)), CL_TWO_BY_TWO)
    assert count_b(ct, "literal") == 8
    assert count_d(ct) == 8
    assert count_b(ct, "separation") == 0


def test_count_b_and_d_separated():
    ct = build_contingency(SegmentMap([[1, 1, 2, 2]]), CL_TWO_BY_TWO)
    assert count_b(ct, "literal") == 8
    assert count_b(ct, "separation") == 8
    assert count_d(ct) == 0


def test_count_b_unknown_mode():
    ct = build_contingency(SegmentMap([[1]]), [[1]])
    with pytest.raises(ValueError, match="mode"):
        count_b(ct, "sideways")


def test_wl_rand_perfect_scene():
    seg = np.repeat(np.array([[1, 1, 2, 2, 3, 3]]), 4, axis=0)
    ml = np.zeros_like(seg)
    ml[1:3, 0:2], ml[0:2, 2:4], ml[2:4, 4:6] = 1, 2, 3
    cl = np.zeros_like(seg)
    cl[:, 0], cl[:, 5] = 1, 2
    for mode in ("literal", "separation"):
        score, counts = wl_rand(SegmentMap(seg), WeakLabels(ml, cl), mode)
        assert score == 1.0
        assert counts.c == 0 and counts.d == 0


def test_wl_rand_scattered_must_link():
    seg = np.arange(9).reshape(3, 3)
    score, counts = wl_rand(SegmentMap(seg), WeakLabels(np.ones((3, 3), int), np.zeros((3, 3), int)))
    assert score == 0.0
    assert counts.a == 0 and counts.b == 0 and counts.c > 0


def test_wl_rand_degenerate():
    z = np.zeros((3, 3), int)
    with pytest.raises(DegenerateLabelsError):
        wl_rand(SegmentMap(z), WeakLabels(z, z))
    ml = np.arange(9).reshape(3, 3)  # singleton must-link regions
    cl = np.zeros((3, 3), int)
    cl[0, 0] = 1
    with pytest.raises(DegenerateLabelsError):
        wl_rand(SegmentMap(z), WeakLabels(ml, cl))


def test_naive_examples():
    seg = SegmentMap(np.ones((3, 3), int))
    ml = np.zeros((3, 3), int)
    ml[:, :2] = 4
    counts = naive_pair_counts(seg, WeakLabels(ml, np.zeros((3, 3), int)))
    assert counts.a == comb(6, 2) and counts.c == 0
    counts = naive_pair_counts(SegmentMap(np.ones((1, 4), int)), WeakLabels(np.zeros((1, 4), int), CL_TWO_BY_TWO))
    assert counts.d == 8


def test_naive_cap():
    seg = SegmentMap(np.zeros((10, 10), int))
    wl = WeakLabels(np.ones((10, 10), int), np.zeros((10, 10), int))
    with pytest.raises(PairCountCapError):
        naive_pair_counts(seg, wl, cap=99)
    assert naive_pair_counts(seg, wl, cap=100).a == comb(100, 2)


def test_naive_agrees_with_python_loops(rng):
    for _ in range(20):
        seg, wl = random_instance(rng, max_side=7)
        expected = loop_counts(seg.labels, wl.must_link, wl.cannot_link)
        lit = naive_pair_counts(seg, wl, "literal")
        sep = naive_pair_counts(seg, wl, "separation")
        assert (lit.a, lit.c, lit.d, lit.b) == (expected["a"], expected["c"], expected["d"], expected["b_literal"])
        assert sep.b == expected["b_separation"]


def test_fast_path_matches_oracle_random(rng):
    for _ in range(200):
        seg, wl = random_instance(rng)
        for mode in ("literal", "separation"):
            assert pair_counts(seg, wl, mode) == naive_pair_counts(seg, wl, mode)


def test_counts_are_python_ints():
    seg, wl = SegmentMap(np.ones((2, 2), int)), WeakLabels(np.ones((2, 2), int), [[1, 2], [1, 2]])
    counts = pair_counts(seg, wl)
    assert all(type(v) is int for v in counts.as_dict().values())


def test_no_overflow_for_huge_regions():
    # one 2^32-pixel region split in half: values beyond int64 range
    from wlrand.grid import ContingencyTable

    half = 2**31
    ct = ContingencyTable(np.array([[half], [half]]), np.array([0, 1]), np.array([1]))
    assert count_c(ct) == 2 * half * half
    assert count_a(ct) == 2 * comb(half, 2)
    ct = ContingencyTable(np.array([[half, half]]), np.array([0]), np.array([1, 2]))
    assert count_d(ct) == 2 * half * half == 2**63


# ------------------------------------------------------------- properties


def label_grids(shape, max_id):
    return arrays(np.int64, shape, elements=st.integers(0, max_id))


@st.composite
def instances(draw):
    h = draw(st.integers(1, 8))
    w = draw(st.integers(1, 8))
    seg = draw(label_grids((h, w), 5))
    ml = draw(label_grids((h, w), 3))
    cl = draw(label_grids((h, w), 3))
    return SegmentMap(seg), WeakLabels(ml, cl)


@settings(max_examples=200, deadline=None)
@given(instances())
def test_conservation_identities(inst):
    seg, wl = inst
    counts = pair_counts(seg, wl)
    ids, sizes = np.unique(wl.must_link[wl.must_link != 0], return_counts=True)
    assert counts.a + counts.c // 2 == sum(comb(int(n), 2) for n in sizes)
    assert counts.c % 2 == 0
    assert counts.d % 2 == 0
    _, csizes = np.unique(wl.cannot_link[wl.cannot_link != 0], return_counts=True)
    total = int(csizes.sum())
    assert counts.b == sum(int(n) * (total - int(n)) for n in csizes)
    assert counts.b == pair_counts(seg, wl, "separation").b + counts.d


@settings(max_examples=100, deadline=None)
@given(instances(), st.randoms(use_true_random=False))
def test_literal_b_is_partition_independent(inst, random):
    seg, wl = inst
    b = pair_counts(seg, wl).b
    other = np.array([[random.randrange(4) for _ in range(seg.width)] for _ in range(seg.height)])
    assert pair_counts(SegmentMap(other), wl).b == b


def _permute(grid, random, keep_zero):
    ids = np.unique(grid)
    new = list(range(1, 10 * len(ids) + 10))
    random.shuffle(new)
    lut = dict(zip(ids.tolist(), new))
    if keep_zero and 0 in lut:
        lut[0] = 0
    return np.vectorize(lut.get)(grid)


@settings(max_examples=100, deadline=None)
@given(instances(), st.randoms(use_true_random=False), st.sampled_from(["literal", "separation"]))
def test_range_and_permutation_invariance(inst, random, mode):
    seg, wl = inst
    try:
        score, counts = wl_rand(seg, wl, mode)
    except DegenerateLabelsError:
        return
    assert 0.0 <= score <= 1.0
    assert (score == 1.0) == (counts.c == 0 and counts.d == 0)
    seg2 = SegmentMap(_permute(seg.labels, random, False))
    wl2 = WeakLabels(_permute(wl.must_link, random, True), _permute(wl.cannot_link, random, True))
    assert wl_rand(seg2, wl2, mode) == (score, counts)


@settings(max_examples=100, deadline=None)
@given(instances(), st.randoms(use_true_random=False))
def test_splitting_a_segment_never_raises_a(inst, random):
    seg, wl = inst
    before = pair_counts(seg, wl)
    labels = seg.labels.copy()
    target = random.choice(np.unique(labels).tolist())
    fresh = int(labels.max()) + 1
    mask = (labels == target) & (np.array([[random.random() < 0.5 for _ in range(seg.width)] for _ in range(seg.height)]))
    labels[mask] = fresh
    after = pair_counts(SegmentMap(labels), wl)
    assert after.a <= before.a
    assert after.c >= before.c
