"""Region adjacency and pairwise region comparison functions.

Each measure works on a prepared per-segment representation:

=============  ==============  =============  ===================================
name           representation  polarity       value
=============  ==============  =============  ===================================
euclid-mean    FeatureBag      dissimilarity  distance between bag means
edist          FeatureBag      dissimilarity  size-weighted energy distance
emd            Signature       dissimilarity  Earth Mover's Distance
jsdiv          histogram       dissimilarity  Jensen-Shannon divergence
mi             FeatureBag      similarity     minus feature/membership MI
=============  ==============  =============  ===================================

The comparison matrix holds the measure between adjacent segments and a
bound ``beta`` everywhere else. By default ``beta`` is ``+inf`` for
dissimilarities and ``-inf`` for similarities, so a non-adjacent pair can
never be the best merge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist
from scipy.special import rel_entr

from .features import (
    DEFAULT_BINS,
    DEFAULT_SIGNATURE_SIZE,
    FeatureBag,
    Signature,
    histogram,
    histogram_counts,
    make_signature,
)
from .grid import SegmentMap

__all__ = [
    "MEASURES",
    "DEFAULT_EXEMPLAR_CAP",
    "AdjacencyMatrix",
    "ComparisonMatrix",
    "MeasureConfig",
    "Measure",
    "get_measure",
    "build_adjacency",
    "euclidean_mean",
    "energy_distance",
    "emd",
    "js_divergence",
    "mutual_information",
    "subsample",
    "build_psi",
]

DEFAULT_EXEMPLAR_CAP = 2048


# ---------------------------------------------------------------- adjacency


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric neighbor relation between segments, indexed like ``ids``."""

    ids: np.ndarray
    matrix: np.ndarray

    def index(self, segment_id: int) -> int:
        pos = int(np.searchsorted(self.ids, segment_id))
        if pos >= self.ids.size or self.ids[pos] != segment_id:
            raise KeyError(segment_id)
        return pos

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.matrix[self.index(i), self.index(j)])

    def pairs(self) -> list[tuple[int, int]]:
        """Adjacent id pairs ``(i, j)`` with ``i < j``, sorted."""
        r, c = np.nonzero(np.triu(self.matrix, k=1))
        return [(int(self.ids[a]), int(self.ids[b])) for a, b in zip(r, c)]

    def neighbors(self, segment_id: int) -> list[int]:
        row = self.matrix[self.index(segment_id)]
        return [int(v) for v in self.ids[row]]


def _touching_pairs(labels: np.ndarray, connectivity: int) -> np.ndarray:
    shifts = [(labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])]
    if connectivity == 8:
        shifts += [(labels[:-1, :-1], labels[1:, 1:]), (labels[:-1, 1:], labels[1:, :-1])]
    chunks = []
    for a, b in shifts:
        diff = a != b
        if diff.any():
            chunks.append(np.stack([a[diff], b[diff]], axis=1))
    if not chunks:
        return np.empty((0, 2), dtype=labels.dtype)
    return np.unique(np.concatenate(chunks), axis=0)


def build_adjacency(seg: SegmentMap, connectivity: int = 4) -> AdjacencyMatrix:
    """Segments are adjacent iff some pixels of each touch under the connectivity."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    ids, dense = seg.dense()
    pairs = _touching_pairs(dense, connectivity)
    mat = np.zeros((ids.size, ids.size), dtype=bool)
    mat[pairs[:, 0], pairs[:, 1]] = True
    mat[pairs[:, 1], pairs[:, 0]] = True
    return AdjacencyMatrix(ids, mat)


# ---------------------------------------------------------------- measures


def subsample(x: np.ndarray, cap: int | None) -> np.ndarray:
    """Deterministic stride subsampling to at most ``cap`` rows."""
    if cap is None or x.shape[0] <= cap:
        return x
    stride = -(-x.shape[0] // cap)
    return x[::stride]


def _check_dims(a: FeatureBag, b: FeatureBag) -> None:
    if a.dim != b.dim:
        raise ValueError(f"feature dimension mismatch: {a.dim} vs {b.dim}")


def euclidean_mean(bag_a: FeatureBag, bag_b: FeatureBag) -> float:
    """Euclidean distance between the two bag means."""
    _check_dims(bag_a, bag_b)
    return float(np.linalg.norm(bag_a.exemplars.mean(axis=0) - bag_b.exemplars.mean(axis=0)))


def energy_distance(bag_a: FeatureBag, bag_b: FeatureBag, cap: int | None = DEFAULT_EXEMPLAR_CAP) -> float:
    """Weighted energy distance of the hierarchical e-clustering criterion.

    ``n m / (n + m) * (2 E|X - Y| - E|X - X'| - E|Y - Y'|)`` with Euclidean
    distances and all-pairs (V-statistic) means. ``n`` and ``m`` are the true
    bag sizes even when the exemplars are subsampled to ``cap``.
    """
    _check_dims(bag_a, bag_b)
    x = subsample(bag_a.exemplars, cap)
    y = subsample(bag_b.exemplars, cap)
    n, m = bag_a.n, bag_b.n
    between = cdist(x, y).mean()
    within_x = cdist(x, x).mean()
    within_y = cdist(y, y).mean()
    return float(n * m / (n + m) * (2.0 * between - within_x - within_y))


def emd(sig_a: Signature, sig_b: Signature) -> float:
    """Earth Mover's Distance between two signatures with Euclidean ground cost.

    Both weight vectors are normalized to unit mass and the balanced
    transportation problem is solved exactly as a linear program (HiGHS
    simplex). Returns the optimal total cost, which equals cost per unit flow.
    """
    if sig_a.centers.shape[1] != sig_b.centers.shape[1]:
        raise ValueError("signature dimension mismatch")
    p = sig_a.weights / sig_a.weights.sum()
    q = sig_b.weights / sig_b.weights.sum()
    cost = cdist(sig_a.centers, sig_b.centers)
    na, nb = cost.shape
    if na == 1:
        return float(q @ cost[0])
    if nb == 1:
        return float(p @ cost[:, 0])
    # flow[i, j] flattened row-major; row sums = p, column sums = q
    a_eq = np.zeros((na + nb, na * nb))
    for i in range(na):
        a_eq[i, i * nb : (i + 1) * nb] = 1.0
    for j in range(nb):
        a_eq[na + j, j::nb] = 1.0
    b_eq = np.concatenate([p, q])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"transportation solver failed: {res.message}")
    flow = np.clip(res.x, 0.0, None)
    return float(flow @ cost.ravel())


def js_divergence(hist_a: np.ndarray, hist_b: np.ndarray) -> float:
    """Jensen-Shannon divergence (natural log), averaged over channels.

    Inputs are ``(D, B)`` normalized histograms on identical binning.
    """
    p = np.atleast_2d(np.asarray(hist_a, dtype=np.float64))
    q = np.atleast_2d(np.asarray(hist_b, dtype=np.float64))
    if p.shape != q.shape:
        raise ValueError(f"mismatched binning: {p.shape} vs {q.shape}")
    mid = 0.5 * (p + q)
    per_channel = 0.5 * rel_entr(p, mid).sum(axis=1) + 0.5 * rel_entr(q, mid).sum(axis=1)
    return float(per_channel.mean())


def mutual_information(
    bag_a: FeatureBag,
    bag_b: FeatureBag,
    bins: int = DEFAULT_BINS,
    value_range=None,
    cap: int | None = DEFAULT_EXEMPLAR_CAP,
) -> float:
    """Plug-in MI between a binned feature value and which bag it came from.

    The pooled exemplars are histogrammed per channel (over ``value_range``,
    default the pooled extent) and ``I(F; Z)`` is computed from the joint
    counts with natural logs, then averaged over channels. Zero when the
    bags are identically distributed; at most ``H(Z)``, which is ``ln 2``
    for equal bag sizes.
    """
    _check_dims(bag_a, bag_b)
    x = subsample(bag_a.exemplars, cap)
    y = subsample(bag_b.exemplars, cap)
    if value_range is None:
        pooled = np.concatenate([x, y])
        value_range = (pooled.min(axis=0), pooled.max(axis=0))
    counts = np.stack(
        [histogram_counts(x, bins, value_range), histogram_counts(y, bins, value_range)], axis=2
    )  # (D, B, 2)
    total = x.shape[0] + y.shape[0]
    joint = counts / total
    pf = counts.sum(axis=2, keepdims=True) / total
    pz = np.array([x.shape[0], y.shape[0]]) / total
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log(joint / (pf * pz)), 0.0)
    h_z = -float(np.sum(pz * np.log(pz)))
    # 0 <= I(F; Z) <= H(Z); clip rounding overshoot at either end
    per_channel = np.clip(terms.sum(axis=(1, 2)), 0.0, h_z)
    return float(per_channel.mean())


@dataclass(frozen=True)
class MeasureConfig:
    """Parameters for preparing segment representations.

    ``value_range`` is the per-channel ``(min, max)`` used for histograms;
    ``None`` lets each comparison use the extent of its own data.
    """

    bins: int = DEFAULT_BINS
    signature_size: int = DEFAULT_SIGNATURE_SIZE
    exemplar_cap: int | None = DEFAULT_EXEMPLAR_CAP
    value_range: tuple | None = None


@dataclass(frozen=True)
class Measure:
    name: str
    polarity: str
    kind: str
    config: MeasureConfig = field(default_factory=MeasureConfig)

    def prepare(self, bag: FeatureBag):
        if self.kind == "signature":
            return make_signature(bag, self.config.signature_size)
        if self.kind == "histogram":
            return histogram(bag, self.config.bins, self.config.value_range)
        return bag

    def compare(self, rep_a, rep_b) -> float:
        self._check_kind(rep_a)
        self._check_kind(rep_b)
        cfg = self.config
        if self.name == "euclid-mean":
            return euclidean_mean(rep_a, rep_b)
        if self.name == "edist":
            return energy_distance(rep_a, rep_b, cfg.exemplar_cap)
        if self.name == "emd":
            return emd(rep_a, rep_b)
        if self.name == "jsdiv":
            return js_divergence(rep_a, rep_b)
        return -mutual_information(rep_a, rep_b, cfg.bins, cfg.value_range, cfg.exemplar_cap)

    def default_beta(self) -> float:
        return np.inf if self.polarity == "dissimilarity" else -np.inf

    def _check_kind(self, rep) -> None:
        expected = {"bag": FeatureBag, "signature": Signature, "histogram": np.ndarray}[self.kind]
        if not isinstance(rep, expected):
            raise TypeError(f"measure {self.name!r} expects a {self.kind}, got {type(rep).__name__}")


_SPECS = {
    "euclid-mean": ("dissimilarity", "bag"),
    "edist": ("dissimilarity", "bag"),
    "emd": ("dissimilarity", "signature"),
    "jsdiv": ("dissimilarity", "histogram"),
    "mi": ("similarity", "bag"),
}
MEASURES = tuple(_SPECS)


def get_measure(name: str, config: MeasureConfig | None = None) -> Measure:
    if name not in _SPECS:
        raise ValueError(f"unknown measure {name!r}; expected one of {MEASURES}")
    polarity, kind = _SPECS[name]
    return Measure(name, polarity, kind, config or MeasureConfig())


# --------------------------------------------------------- comparison matrix


@dataclass(frozen=True)
class ComparisonMatrix:
    ids: np.ndarray
    values: np.ndarray
    polarity: str
    beta: float

    def __getitem__(self, pair: tuple[int, int]) -> float:
        i, j = (int(np.searchsorted(self.ids, v)) for v in pair)
        return float(self.values[i, j])


def build_psi(reps: dict, adj: AdjacencyMatrix, measure: Measure, beta: float | None = None) -> ComparisonMatrix:
    """Fill ``measure`` between adjacent segments and ``beta`` elsewhere.

    Parameters
    ----------
    reps : dict
        Segment id to the representation ``measure`` expects.
    adj : AdjacencyMatrix
    measure : Measure
    beta : float, optional
        Bound for non-adjacent entries and the diagonal. Must not beat any
        adjacent value (it must be >= them for dissimilarities, <= them for
        similarities).
    """
    if beta is None:
        beta = measure.default_beta()
    missing = [int(i) for i in adj.ids if int(i) not in reps]
    if missing:
        raise KeyError(f"no representation for segments {missing}")
    values = np.full(adj.matrix.shape, float(beta))
    for i, j in adj.pairs():
        v = measure.compare(reps[i], reps[j])
        a, b = adj.index(i), adj.index(j)
        values[a, b] = values[b, a] = v
    adjacent = values[adj.matrix]
    if adjacent.size:
        if measure.polarity == "dissimilarity" and beta < adjacent.max():
            raise ValueError("beta must be an upper bound for a dissimilarity")
        if measure.polarity == "similarity" and beta > adjacent.min():
            raise ValueError("beta must be a lower bound for a similarity")
    values.setflags(write=False)
    return ComparisonMatrix(adj.ids.copy(), values, measure.polarity, float(beta))
