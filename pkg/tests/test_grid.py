import numpy as np
import pytest

from wlrand import SegmentMap, WeakLabels, build_contingency, validate_pair
from wlrand.grid import (
    CrispLabels,
    DimensionError,
    GridFormatError,
    load_grid,
    load_segment_map,
    save_segment_map,
)


def test_csv_read_back(tmp_path):
    p = tmp_path / "seg.csv"
    p.write_text("1,1\n2,2\n")
    seg = load_segment_map(p)
    assert seg.K == 2
    assert seg.sizes() == {1: 2, 2: 2}


def test_pgm_constant_map(tmp_path):
    p = tmp_path / "seg.pgm"
    p.write_bytes(b"P5\n3 2\n65535\n" + np.full(6, 7, dtype=">u2").tobytes())
    seg = load_segment_map(p)
    assert seg.K == 1
    assert seg.shape == (2, 3)
    assert np.all(seg.labels == 7)


@pytest.mark.parametrize("ext", ["csv", "pgm"])
def test_round_trip_bit_exact(tmp_path, rng, ext):
    labels = rng.integers(0, 65536, size=(16, 16))
    path = tmp_path / f"seg.{ext}"
    save_segment_map(path, SegmentMap(labels))
    back = load_segment_map(path)
    assert np.array_equal(back.labels, labels)
    first = path.read_bytes()
    save_segment_map(path, back)
    assert path.read_bytes() == first


def test_pgm_bytes_are_big_endian(tmp_path):
    path = tmp_path / "x.pgm"
    save_segment_map(path, SegmentMap([[1, 258]]))
    assert path.read_bytes() == b"P5\n2 1\n65535\n\x00\x01\x01\x02"


def test_ids_kept_verbatim(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("5,900\n0,5\n")
    seg = load_segment_map(p)
    assert list(seg.ids) == [0, 5, 900]
    ids, dense = seg.dense()
    assert dense.tolist() == [[1, 2], [0, 1]]


@pytest.mark.parametrize(
    "content, fragment",
    [
        ("1,2\n3,x\n", "non-integer"),
        ("1,2\n3\n", "dimension mismatch"),
        ("1.5,2\n", "non-integer"),
    ],
)
def test_csv_errors(tmp_path, content, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(content)
    with pytest.raises(GridFormatError, match=fragment):
        load_grid(p)


def test_pgm_errors(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(GridFormatError, match="magic"):
        load_grid(p)
    p.write_bytes(b"P5\n2 2\n65535\n" + bytes(6))
    with pytest.raises(GridFormatError, match="dimension mismatch"):
        load_grid(p)
    p.write_bytes(b"P5\n2 x\n65535\n" + bytes(8))
    with pytest.raises(GridFormatError):
        load_grid(p)


def test_pgm_header_comment_and_8bit(tmp_path):
    p = tmp_path / "img.pgm"
    p.write_bytes(b"P5\n# a comment\n2 1\n255\n\x03\xff")
    assert load_grid(p).tolist() == [[3, 255]]


def test_partition_sizes_sum(rng):
    seg = SegmentMap(rng.integers(0, 9, size=(13, 7)))
    assert sum(seg.sizes().values()) == 13 * 7


def test_contingency_examples():
    ct = build_contingency(SegmentMap(np.ones((3, 3), int)), np.ones((3, 3), int))
    assert ct.counts.tolist() == [[9]]
    ct = build_contingency(SegmentMap([[1, 2]]), [[1, 1]])
    assert ct.counts.tolist() == [[1], [1]]
    assert list(ct.row_ids) == [1, 2]


def test_contingency_matches_naive_tally(rng):
    seg = SegmentMap(rng.integers(0, 6, size=(32, 32)))
    ref = rng.integers(0, 5, size=(32, 32))
    ct = build_contingency(seg, ref)
    expected = {}
    for s, r in zip(seg.labels.ravel(), ref.ravel()):
        if r != 0:
            expected[(int(s), int(r))] = expected.get((int(s), int(r)), 0) + 1
    for i, s in enumerate(ct.row_ids):
        for j, r in enumerate(ct.col_ids):
            assert ct.counts[i, j] == expected.get((int(s), int(r)), 0)
    assert ct.total == int(np.count_nonzero(ref))
    assert np.array_equal(ct.row_sums, ct.counts.sum(axis=1))
    for j, r in enumerate(ct.col_ids):
        assert ct.col_sums[j] == np.count_nonzero(ref == r)


def test_contingency_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_contingency(SegmentMap(np.zeros((2, 2), int)), np.zeros((2, 3), int))


def test_unlabeled_pixels_contribute_nothing():
    ct = build_contingency(SegmentMap([[1, 1, 2]]), [[0, 3, 0]])
    assert ct.counts.tolist() == [[1], [0]]


def test_validate_pair_ok():
    seg = SegmentMap(np.arange(64).reshape(8, 8) % 4)
    ml = np.zeros((8, 8), int)
    ml[:2, :2], ml[5:, 5:] = 1, 2
    cl = np.zeros((8, 8), int)
    cl[0, 4:], cl[7, :4] = 1, 2
    rep = validate_pair(seg, WeakLabels(ml, cl))
    assert rep.valid and not rep.warnings
    assert (rep.K, rep.L, rep.U) == (4, 2, 2)


def test_validate_pair_dimension_mismatch():
    seg = SegmentMap(np.zeros((8, 8), int))
    wl = WeakLabels(np.ones((4, 4), int), np.ones((4, 4), int))
    rep = validate_pair(seg, wl)
    assert not rep.valid
    assert "dimension mismatch" in rep.errors[0]


def test_validate_pair_noncontiguous_warning():
    ml = np.zeros((8, 8), int)
    ml[0, 0] = 1
    ml[4, 4] = 3
    rep = validate_pair(SegmentMap(np.zeros((8, 8), int)), WeakLabels(ml, np.zeros((8, 8), int)))
    assert rep.valid
    assert any("non-contiguous" in w for w in rep.warnings)


def test_validate_pair_no_labels():
    z = np.zeros((3, 3), int)
    assert not validate_pair(SegmentMap(z), WeakLabels(z, z)).valid


def test_types_reject_bad_input():
    with pytest.raises(ValueError):
        SegmentMap([[-1, 0]])
    with pytest.raises(ValueError):
        SegmentMap([1, 2, 3])
    with pytest.raises(DimensionError):
        WeakLabels(np.zeros((2, 2), int), np.zeros((3, 2), int))
    with pytest.raises(ValueError):
        CrispLabels(np.zeros((2, 2), int))


def test_segment_map_is_immutable():
    seg = SegmentMap([[1, 2]])
    with pytest.raises(ValueError):
        seg.labels[0, 0] = 5
