"""Scoring a segmentation against sparse must-link / cannot-link labels.

Run with ``python3 tutorials/01_weak_label_scoring.py``.
"""

import numpy as np

from wlrand import SegmentMap, WeakLabels, naive_pair_counts, wl_rand

# A 6x6 image cut into a left and a right segment.
seg = SegmentMap(np.repeat([[1, 1, 1, 2, 2, 2]], 6, axis=0))

# Two must-link scribbles, one per side, and two cannot-link regions that
# also sit on opposite sides. Zero means "no label here".
must = np.zeros((6, 6), dtype=int)
must[1:3, 0:2] = 1
must[1:3, 4:6] = 2
cannot = np.zeros((6, 6), dtype=int)
cannot[4:6, 0:2] = 1
cannot[4:6, 4:6] = 2
wl = WeakLabels(must, cannot)

for mode in ("literal", "separation"):
    score, counts = wl_rand(seg, wl, mode)
    print(f"{mode:10s} score={score:.4f} counts={counts.as_dict()}")

# The contingency-table counts agree with brute-force pair enumeration.
assert naive_pair_counts(seg, wl, "literal") == wl_rand(seg, wl, "literal")[1]

# Merging the two halves puts the must-link groups together, which is fine,
# but also puts the cannot-link groups together, which costs score.
merged = SegmentMap(np.ones((6, 6), dtype=int))
print("one segment:", round(wl_rand(merged, wl, "separation")[0], 4))
