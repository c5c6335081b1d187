"""Crisp segmentation agreement indices: IoU, GCE, Rand, Adjusted Rand, Hubert.

Ground truth may be partial. Pixels whose class is 0 are dropped before any
pair or pixel sum, so every index compares the candidate partition with the
labeled part of the image only.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .grid import ContingencyTable, CrispLabels, SegmentMap, build_contingency

__all__ = [
    "CrispScoreSet",
    "rand_index",
    "adjusted_rand",
    "hubert",
    "iou",
    "gce",
    "crisp_scores",
]


@dataclass(frozen=True)
class CrispScoreSet:
    iou: float
    gce: float
    rand: float
    adjusted_rand: float
    hubert: float

    def as_dict(self) -> dict:
        return asdict(self)


def _table(seg: SegmentMap, gt: CrispLabels, min_labeled: int = 1) -> ContingencyTable:
    ct = build_contingency(seg, gt.classes)
    if ct.total < min_labeled:
        raise ValueError(f"need at least {min_labeled} labeled pixels, got {ct.total}")
    # drop segments without labeled pixels; they take part in no sum
    keep = ct.row_sums > 0
    return ContingencyTable(ct.counts[keep], ct.row_ids[keep], ct.col_ids)


def _comb2(x) -> int:
    x = np.asarray(x).astype(object)
    return int((x * (x - 1) // 2).sum())


def _pair_agreement(ct: ContingencyTable) -> tuple[int, int]:
    """Return ``(agreeing pairs, total pairs)`` over labeled pixels."""
    n = ct.total
    total = n * (n - 1) // 2
    both = _comb2(ct.counts)
    same_seg = _comb2(ct.row_sums)
    same_cls = _comb2(ct.col_sums)
    # together in both + apart in both
    agree = both + (total - same_seg - same_cls + both)
    return agree, total


def rand_index(seg: SegmentMap, gt: CrispLabels) -> float:
    """Fraction of unordered labeled pixel pairs on which both partitions agree."""
    agree, total = _pair_agreement(_table(seg, gt, 2))
    return float(Fraction(agree, total))


def hubert(seg: SegmentMap, gt: CrispLabels) -> float:
    """Hubert's index: (agreements - disagreements) / total pairs.

    Since disagreements = total - agreements this is ``2 * rand - 1``, which
    is how it is evaluated so that the identity holds bit for bit.
    """
    return 2.0 * rand_index(seg, gt) - 1.0


def adjusted_rand(seg: SegmentMap, gt: CrispLabels) -> float:
    """Permutation-model Adjusted Rand index.

    Returns 0.0 (with a ``RuntimeWarning``) when the expected-index
    denominator vanishes, e.g. both partitions are single blocks or both
    are all singletons.
    """
    ct = _table(seg, gt, 2)
    n = ct.total
    index = _comb2(ct.counts)
    sum_rows = _comb2(ct.row_sums)
    sum_cols = _comb2(ct.col_sums)
    total = n * (n - 1) // 2
    expected = Fraction(sum_rows * sum_cols, total)
    max_index = Fraction(sum_rows + sum_cols, 2)
    denom = max_index - expected
    if denom == 0:
        warnings.warn("adjusted Rand denominator is zero; returning 0.0", RuntimeWarning, stacklevel=2)
        return 0.0
    return float((index - expected) / denom)


def iou(seg: SegmentMap, gt: CrispLabels) -> float:
    """Mean over classes of the best-matching segment's intersection over union.

    For class ``j``: ``max_k |S_k ∩ T_j| / |S_k ∪ T_j|`` where ``S_k`` is
    restricted to labeled pixels. Several classes may pick the same segment.
    """
    ct = _table(seg, gt)
    n = ct.counts.astype(np.float64)
    union = ct.row_sums[:, None] + ct.col_sums[None, :] - ct.counts
    ratio = n / union
    return float(ratio.max(axis=0).mean())


def _refinement_error(ct: ContingencyTable) -> float:
    """``sum_p |R(A,p) \\ R(B,p)| / |R(A,p)|`` with A = rows, B = columns."""
    n = ct.counts.astype(np.float64)
    sizes = ct.row_sums.astype(np.float64)[:, None]
    return float((n * (sizes - n) / sizes).sum())


def gce(seg: SegmentMap, gt: CrispLabels) -> float:
    """Global Consistency Error in ``[0, 1]``; 0 when either input refines the other."""
    ct = _table(seg, gt)
    fwd = _refinement_error(ct)
    rev = _refinement_error(ContingencyTable(ct.counts.T, ct.col_ids, ct.row_ids))
    return min(fwd, rev) / ct.total


def crisp_scores(seg: SegmentMap, gt: CrispLabels) -> CrispScoreSet:
    ri = rand_index(seg, gt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ar = adjusted_rand(seg, gt)
    return CrispScoreSet(
        iou=iou(seg, gt),
        gce=gce(seg, gt),
        rand=ri,
        adjusted_rand=ar,
        hubert=2.0 * ri - 1.0,
    )
