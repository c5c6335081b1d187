"""Greedy merging of superpixels and choosing a level from weak labels.

Run with ``python3 tutorials/05_merge_and_sweep.py``.
"""

from wlrand import MEASURES, best_candidate, greedy_merge, score_trace
from wlrand.synthetic import erode_must_link, three_texture_scene

scene = three_texture_scene(size=96, rows=5, cols=6, seed=0)
print("superpixels:", scene.superpixels.K, "textures: 3")

for name in MEASURES:
    trace = greedy_merge(scene.superpixels, scene.features, measure=name)
    scores = score_trace(trace, scene.weak, scene.crisp, mode="separation")
    level, seg = best_candidate(scores, "wl_rand")
    print(
        f"{name:12s} best level {level}, score {scores.column('wl_rand').max():.3f},"
        f" mean {scores.mean_wl_rand:.3f} +/- {scores.std_wl_rand:.3f},"
        f" IoU there {scores.rows[trace.initial_count - level].crisp.iou:.3f}"
    )

# Thinner scribbles still pick the same level.
trace = greedy_merge(scene.superpixels, scene.features)
for px in (1, 2, 3):
    weak = erode_must_link(scene.weak, px)
    print(f"must-link eroded by {px}px: best level", score_trace(trace, weak).best_level("wl_rand"))
