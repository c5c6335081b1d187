"""Classic indices against dense class labels, for comparison.

Run with ``python3 tutorials/02_crisp_indices.py``.
"""

import numpy as np

from wlrand import CrispLabels, SegmentMap, crisp_scores

truth = CrispLabels(np.repeat([[1, 1, 1, 2, 2, 2]], 6, axis=0))

candidates = {
    "exact": SegmentMap(np.repeat([[1, 1, 1, 2, 2, 2]], 6, axis=0)),
    "shifted": SegmentMap(np.repeat([[1, 1, 2, 2, 2, 2]], 6, axis=0)),
    "one segment": SegmentMap(np.ones((6, 6), dtype=int)),
    "every pixel": SegmentMap(np.arange(1, 37).reshape(6, 6)),
}

for name, seg in candidates.items():
    scores = crisp_scores(seg, truth)
    print(f"{name:12s}", {k: round(v, 4) for k, v in scores.as_dict().items()})

# Note how GCE is 0 for both trivial partitions: it cannot tell them apart
# from the exact answer.
