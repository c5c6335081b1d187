"""Hand-crafted texture features and the raw float feature file format.

Run with ``python3 tutorials/03_texture_features.py``.
"""

import tempfile
from pathlib import Path

from wlrand import hc_features, load_feature_map, save_feature_map
from wlrand.synthetic import texture_image, three_texture_scene

texture = three_texture_scene(96).texture
image = texture_image(texture, seed=1)

fm = hc_features(image, scales=(2, 4, 8))
print("feature map:", fm.shape, "channels:", fm.channels)
for t in (1, 2, 3):
    mean = fm.values[texture == t].mean(axis=0)
    print(f"texture {t} mean feature:", mean.round(2))

# Half resolution: 2x2 box means before filtering.
print("downsampled:", hc_features(image, factor=2).shape)

with tempfile.TemporaryDirectory() as tmp:
    header, payload = Path(tmp, "hc.json"), Path(tmp, "hc.bin")
    save_feature_map(header, payload, fm)
    back = load_feature_map(header, payload)
    print("round trip max error:", float(abs(back.values - fm.values).max()))
