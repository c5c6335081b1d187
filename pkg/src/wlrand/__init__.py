"""Weakly-labeled Rand index and superpixel-merging evaluation tools."""

from .compare import (
    MEASURES,
    AdjacencyMatrix,
    ComparisonMatrix,
    MeasureConfig,
    build_adjacency,
    build_psi,
    emd,
    energy_distance,
    euclidean_mean,
    get_measure,
    js_divergence,
    mutual_information,
)
from .crisp import CrispScoreSet, adjusted_rand, crisp_scores, gce, hubert, iou, rand_index
from .features import (
    FeatureBag,
    FeatureMap,
    Signature,
    bag_features,
    downsample,
    hc_features,
    histogram,
    lacunarity,
    load_feature_map,
    make_signature,
    save_feature_map,
    sobel,
)
from .grid import (
    ContingencyTable,
    CrispLabels,
    SegmentMap,
    WeakLabels,
    build_contingency,
    load_grid,
    load_segment_map,
    save_grid,
    save_segment_map,
    validate_pair,
)
from .merge import (
    LevelScores,
    MergeTrace,
    best_candidate,
    greedy_merge,
    iter_levels,
    reconstruct_level,
    score_trace,
)
from .wl_index import (
    PairCounts,
    count_a,
    count_b,
    count_c,
    count_d,
    naive_pair_counts,
    pair_counts,
    wl_rand,
)

__version__ = "0.1.0"
