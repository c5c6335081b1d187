"""Greedy hierarchical merging of superpixels and per-level scoring.

Starting from an initial superpixel map, the best adjacent pair under a
comparison measure is merged until one segment is left (or, for a
disconnected adjacency graph, one per connected component). Every
intermediate partition is a candidate; ``score_trace`` scores them all.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .compare import Measure, MeasureConfig, build_adjacency, get_measure
from .crisp import CrispScoreSet, crisp_scores
from .features import FeatureBag, FeatureMap, channel_range
from .grid import CrispLabels, DimensionError, SegmentMap, WeakLabels
from .wl_index import PairCounts, wl_rand

__all__ = [
    "INDEX_NAMES",
    "MergeStep",
    "MergeTrace",
    "MergeTraceError",
    "LevelScore",
    "LevelScores",
    "greedy_merge",
    "reconstruct_level",
    "iter_levels",
    "score_trace",
    "best_candidate",
]

INDEX_NAMES = ("wl_rand", "iou", "gce", "rand", "adjusted_rand", "hubert")
# indices where lower is better
_ERROR_INDICES = frozenset({"gce"})


class MergeTraceError(RuntimeError):
    """A recorded merge is inconsistent with the partition it applies to."""


@dataclass(frozen=True)
class MergeStep:
    survivor: int
    absorbed: int
    psi: float


@dataclass(frozen=True)
class MergeTrace:
    initial: SegmentMap
    steps: tuple[MergeStep, ...]
    measure: str
    connectivity: int

    @property
    def initial_count(self) -> int:
        return self.initial.K

    @property
    def final_count(self) -> int:
        return self.initial.K - len(self.steps)

    @property
    def levels(self) -> range:
        """Segment counts of every candidate, finest first."""
        return range(self.initial_count, self.final_count - 1, -1)

    def to_json(self, initial_map_path: str) -> str:
        doc = {
            "initial_map": str(initial_map_path),
            "measure": self.measure,
            "connectivity": self.connectivity,
            "initial_count": self.initial_count,
            "final_count": self.final_count,
            "steps": [
                {"survivor": s.survivor, "absorbed": s.absorbed, "psi": s.psi} for s in self.steps
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, initial: SegmentMap) -> "MergeTrace":
        doc = json.loads(text)
        steps = tuple(MergeStep(int(s["survivor"]), int(s["absorbed"]), float(s["psi"])) for s in doc["steps"])
        return cls(initial, steps, doc["measure"], int(doc["connectivity"]))


def greedy_merge(
    seg0: SegmentMap,
    features: FeatureMap,
    measure: str | Measure = "euclid-mean",
    connectivity: int = 4,
    config: MeasureConfig | None = None,
) -> MergeTrace:
    """Merge the best adjacent pair of segments until no adjacent pair is left.

    The best pair is the adjacent one with the smallest dissimilarity (or
    largest similarity); ties go to the lexicographically smallest
    ``(min id, max id)``. The smaller id survives. The merged segment's
    representation is rebuilt from its pooled pixels and only its
    comparisons with its new neighbors are recomputed. Histogram-based
    measures bin over the per-channel extent of ``features`` unless the
    config fixes a range.

    Warns (``RuntimeWarning``) and stops early if the adjacency graph of
    ``seg0`` is disconnected; the trace then ends at one segment per
    connected component.
    """
    if isinstance(measure, str):
        measure = get_measure(measure, config)
    if seg0.K < 2:
        raise ValueError("need at least two segments to merge")
    if features.shape != seg0.shape:
        raise DimensionError(f"feature map {features.shape} does not match segment map {seg0.shape}")

    if measure.config.value_range is None:
        # histograms share one binning: the per-channel extent of the whole map
        measure = replace(measure, config=replace(measure.config, value_range=channel_range(features)))

    flat = features.values.reshape(-1, features.channels)
    labels = seg0.labels.ravel()
    order = np.argsort(labels, kind="stable")
    ids, starts = np.unique(labels[order], return_index=True)
    members = {int(i): idx for i, idx in zip(ids, np.split(order, starts[1:]))}
    reps = {i: measure.prepare(FeatureBag(i, flat[idx])) for i, idx in members.items()}

    adj = build_adjacency(seg0, connectivity)
    neighbors = {int(i): set(adj.neighbors(int(i))) for i in adj.ids}
    psi: dict[tuple[int, int], float] = {pair: measure.compare(reps[pair[0]], reps[pair[1]]) for pair in adj.pairs()}

    sign = 1.0 if measure.polarity == "dissimilarity" else -1.0
    steps = []
    while psi:
        (i, j), value = min(psi.items(), key=lambda kv: (sign * kv[1], kv[0]))
        steps.append(MergeStep(i, j, value))
        members[i] = np.sort(np.concatenate([members[i], members.pop(j)]))
        reps.pop(j)
        reps[i] = measure.prepare(FeatureBag(i, flat[members[i]]))
        merged = (neighbors[i] | neighbors.pop(j)) - {i, j}
        for n in merged:
            neighbors[n].discard(j)
            neighbors[n].add(i)
        neighbors[i] = merged
        psi = {p: v for p, v in psi.items() if i not in p and j not in p}
        for n in sorted(merged):
            pair = (min(i, n), max(i, n))
            psi[pair] = measure.compare(reps[pair[0]], reps[pair[1]])

    if len(members) > 1:
        warnings.warn(
            f"adjacency graph is disconnected; merging stopped at {len(members)} components",
            RuntimeWarning,
            stacklevel=2,
        )
    return MergeTrace(seg0, tuple(steps), measure.name, connectivity)


def _check_level(k: int, trace: MergeTrace) -> None:
    if not trace.final_count <= k <= trace.initial_count:
        raise ValueError(f"level {k} outside {trace.final_count}..{trace.initial_count}")


def reconstruct_level(trace: MergeTrace, k: int) -> SegmentMap:
    """Partition with ``k`` segments: the initial map after its first ``K0 - k`` merges."""
    _check_level(k, trace)
    ids, dense = trace.initial.dense()
    lut = ids.copy()
    for step in trace.steps[: trace.initial_count - k]:
        lut[lut == step.absorbed] = step.survivor
    return SegmentMap(lut[dense])


def iter_levels(trace: MergeTrace, check: bool = True):
    """Yield ``(k, SegmentMap)`` from the finest level to the coarsest.

    With ``check`` on, every merge is verified to join two segments that
    are present and adjacent at that level.
    """
    ids, dense = trace.initial.dense()
    lut = ids.copy()
    current = trace.initial
    k = trace.initial_count
    yield k, current
    for step in trace.steps:
        if check:
            adj = build_adjacency(current, trace.connectivity)
            try:
                ok = adj.adjacent(step.survivor, step.absorbed)
            except KeyError:
                ok = False
            if not ok:
                raise MergeTraceError(f"merge {step.survivor}<-{step.absorbed} joins non-adjacent segments")
        lut[lut == step.absorbed] = step.survivor
        current = SegmentMap(lut[dense])
        k -= 1
        if check and current.K != k:
            raise MergeTraceError(f"level {k} has {current.K} segments")
        yield k, current


@dataclass(frozen=True)
class LevelScore:
    level: int
    wl_rand: float
    counts: PairCounts
    crisp: CrispScoreSet | None = None

    def value(self, index: str) -> float:
        if index == "wl_rand":
            return self.wl_rand
        if index not in INDEX_NAMES:
            raise ValueError(f"unknown index {index!r}; expected one of {INDEX_NAMES}")
        if self.crisp is None:
            raise ValueError(f"index {index!r} needs crisp labels")
        return getattr(self.crisp, index)


@dataclass(frozen=True)
class LevelScores:
    trace: MergeTrace
    mode: str
    rows: tuple[LevelScore, ...]

    @property
    def has_crisp(self) -> bool:
        return bool(self.rows) and self.rows[0].crisp is not None

    @property
    def indices(self) -> tuple[str, ...]:
        return INDEX_NAMES if self.has_crisp else ("wl_rand",)

    def column(self, index: str) -> np.ndarray:
        return np.array([row.value(index) for row in self.rows])

    @property
    def mean_wl_rand(self) -> float:
        return float(self.column("wl_rand").mean())

    @property
    def std_wl_rand(self) -> float:
        """Population standard deviation over levels."""
        return float(self.column("wl_rand").std())

    def best_level(self, index: str) -> int:
        if not self.rows:
            raise ValueError("no scored levels")
        values = self.column(index)
        target = values.min() if index in _ERROR_INDICES else values.max()
        return min(row.level for row, v in zip(self.rows, values) if v == target)


def score_trace(
    trace: MergeTrace,
    wl: WeakLabels,
    crisp: CrispLabels | None = None,
    mode: str = "literal",
) -> LevelScores:
    """Score every candidate level against weak (and optionally crisp) labels."""
    if wl.shape != trace.initial.shape:
        raise DimensionError(f"weak labels {wl.shape} do not match segment map {trace.initial.shape}")
    if crisp is not None and crisp.shape != trace.initial.shape:
        raise DimensionError(f"crisp labels {crisp.shape} do not match segment map {trace.initial.shape}")
    rows = []
    for k, seg in iter_levels(trace):
        score, counts = wl_rand(seg, wl, mode)
        rows.append(LevelScore(k, score, counts, crisp_scores(seg, crisp) if crisp is not None else None))
    return LevelScores(trace, mode, tuple(rows))


def best_candidate(scores: LevelScores, index: str = "wl_rand") -> tuple[int, SegmentMap]:
    """Level preferred by ``index`` and its partition.

    Higher is better except for GCE. Ties go to the level with the fewest
    segments.
    """
    if index not in INDEX_NAMES:
        raise ValueError(f"unknown index {index!r}; expected one of {INDEX_NAMES}")
    level = scores.best_level(index)
    return level, reconstruct_level(scores.trace, level)
