"""Weakly-labeled Rand index.

The four pair counts are computed from contingency tables between a
candidate partition and the must-link / cannot-link grids. Counting
conventions follow the defining formulas exactly: ``a`` counts unordered
pixel pairs (binomial choose 2) while ``c``, ``d`` and the literal ``b`` are
sums of products and so count ordered pairs. No factor-of-two correction is
applied.

Two readings of the cannot-link agreement term ``b`` are offered:

``literal``
    ``sum_k sum_u sum_{u' != u} |C_u'| * |S_k ∩ C_u|``. Summing over ``k``
    collapses this to ``sum_{u != u'} |C_u| |C_u'|``, so it does not depend
    on the partition at all.
``separation``
    ``sum_k sum_u sum_{u' != u} |S_k ∩ C_u| * (|C_u'| - |S_k ∩ C_u'|)``,
    i.e. ``literal - d``: the ordered cross-region pairs that the partition
    actually keeps apart.

All arithmetic is done on Python integers, so counts never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ContingencyTable, SegmentMap, WeakLabels, build_contingency

__all__ = [
    "MODES",
    "DegenerateLabelsError",
    "PairCountCapError",
    "PairCounts",
    "count_a",
    "count_b",
    "count_c",
    "count_d",
    "pair_counts",
    "wl_rand",
    "naive_pair_counts",
]

MODES = ("literal", "separation")
DEFAULT_NAIVE_CAP = 4096


class DegenerateLabelsError(ValueError):
    """``a + b + c + d == 0``: the labels impose no pair constraint."""


class PairCountCapError(RuntimeError):
    """Too many labeled pixels for the quadratic reference enumeration."""


@dataclass(frozen=True)
class PairCounts:
    a: int
    b: int
    c: int
    d: int

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


def _exact(ct: ContingencyTable) -> np.ndarray:
    return ct.counts.astype(object)


def count_a(ct: ContingencyTable) -> int:
    """Correct must-link pairs: ``sum_k sum_l C(|S_k ∩ M_l|, 2)``."""
    n = _exact(ct)
    return int((n * (n - 1) // 2).sum())


def count_c(ct: ContingencyTable) -> int:
    """Incorrect must-link pairs: ``sum_k sum_l (|M_l| - |S_k ∩ M_l|) |S_k ∩ M_l|``."""
    n = _exact(ct)
    region_size = n.sum(axis=0)
    return int(((region_size[None, :] - n) * n).sum())


def count_d(ct: ContingencyTable) -> int:
    """Incorrect cannot-link pairs: ``sum_k sum_u sum_{u'≠u} |S_k∩C_u| |S_k∩C_u'|``."""
    n = _exact(ct)
    within = n.sum(axis=1)
    return int(((within[:, None] - n) * n).sum())


def count_b(ct: ContingencyTable, mode: str = "literal") -> int:
    """Correct cannot-link pairs under the ``literal`` or ``separation`` reading."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    n = _exact(ct)
    region_size = n.sum(axis=0)
    labeled = region_size.sum()
    # |C_u'| summed over u' != u
    others = labeled - region_size
    literal = int((n * others[None, :]).sum())
    if mode == "literal":
        return literal
    return literal - count_d(ct)


def pair_counts(seg: SegmentMap, wl: WeakLabels, mode: str = "literal") -> PairCounts:
    """Contingency-table fast path for all four counts."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    ml = build_contingency(seg, wl.must_link)
    cl = build_contingency(seg, wl.cannot_link)
    return PairCounts(
        a=count_a(ml),
        b=count_b(cl, mode),
        c=count_c(ml),
        d=count_d(cl),
    )


def wl_rand(seg: SegmentMap, wl: WeakLabels, mode: str = "literal") -> tuple[float, PairCounts]:
    """Score a partition against weak labels.

    Parameters
    ----------
    seg : SegmentMap
        Candidate partition.
    wl : WeakLabels
        Must-link and cannot-link grids of the same shape.
    mode : {'literal', 'separation'}
        Reading of the cannot-link agreement term; see module docstring.

    Returns
    -------
    score : float
        ``(a + b) / (a + b + c + d)``, in ``[0, 1]``; 1 iff ``c == d == 0``.
    counts : PairCounts

    Raises
    ------
    DegenerateLabelsError
        If all four counts are zero, e.g. no labels at all, or only
        single-pixel must-link regions and at most one cannot-link region.
    """
    counts = pair_counts(seg, wl, mode)
    total = counts.total
    if total == 0:
        raise DegenerateLabelsError("a + b + c + d = 0; labels define no pairs")
    return (counts.a + counts.b) / total, counts


def naive_pair_counts(
    seg: SegmentMap, wl: WeakLabels, mode: str = "literal", cap: int = DEFAULT_NAIVE_CAP
) -> PairCounts:
    """Reference counts by direct enumeration of pixel pairs.

    Independent of the contingency path: every pair of labeled pixels is
    visited once and classified. Used to verify the fast path.

    Raises
    ------
    PairCountCapError
        If more than ``cap`` pixels carry a must-link or cannot-link label.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if seg.shape != wl.shape:
        raise ValueError(f"shape mismatch: {seg.shape} vs {wl.shape}")
    s = seg.labels.ravel()
    m = wl.must_link.ravel()
    cl = wl.cannot_link.ravel()
    labeled = int(np.count_nonzero((m != 0) | (cl != 0)))
    if labeled > cap:
        raise PairCountCapError(f"{labeled} labeled pixels exceed the cap of {cap}")

    # must-link: unordered pairs i < j inside one region
    idx = np.flatnonzero(m != 0)
    sm, mm = s[idx], m[idx]
    same_seg = sm[:, None] == sm[None, :]
    same_region = mm[:, None] == mm[None, :]
    upper = np.triu(np.ones((idx.size, idx.size), dtype=bool), k=1)
    a = int(np.count_nonzero(upper & same_region & same_seg))
    split = int(np.count_nonzero(upper & same_region & ~same_seg))

    # cannot-link: ordered pairs i != j in different regions
    idx = np.flatnonzero(cl != 0)
    sc, cc = s[idx], cl[idx]
    cross = cc[:, None] != cc[None, :]
    same_seg = sc[:, None] == sc[None, :]
    b_literal = int(np.count_nonzero(cross))
    d = int(np.count_nonzero(cross & same_seg))
    b_separation = int(np.count_nonzero(cross & ~same_seg))

    # each unordered split pair appears twice in the product form
    return PairCounts(
        a=a,
        b=b_literal if mode == "literal" else b_separation,
        c=2 * split,
        d=d,
    )
