"""Per-pixel feature maps and per-segment feature representations.

Hand-crafted ("HC") features are multi-scale local lacunarity plus Sobel
gradient magnitude. Any other per-pixel features, e.g. activations of a
pretrained network, are ingested from disk in a small raw-float format:

* header ``<name>.json``: ``{"height": H, "width": W, "channels": D,
  "dtype": "f32", "layout": "hwc"}``
* payload ``<name>.bin``: ``H*W*D`` little-endian float32 values, ``hwc`` order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .grid import DimensionError, SegmentMap

__all__ = [
    "DEFAULT_SCALES",
    "DEFAULT_BINS",
    "DEFAULT_SIGNATURE_SIZE",
    "FeatureFormatError",
    "FeatureMap",
    "FeatureBag",
    "Signature",
    "downsample",
    "sobel",
    "lacunarity",
    "hc_features",
    "zscore_channels",
    "load_feature_map",
    "save_feature_map",
    "bag_features",
    "make_signature",
    "channel_range",
    "histogram",
    "histogram_counts",
]

DEFAULT_SCALES = (2, 4, 8)
DEFAULT_BINS = 32
DEFAULT_SIGNATURE_SIZE = 8
KMEANS_ITERATIONS = 25

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T


class FeatureFormatError(ValueError):
    """A feature file header or payload is invalid."""


@dataclass(frozen=True)
class FeatureMap:
    """``H x W x D`` grid of finite real feature vectors."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise ValueError(f"feature map must be H x W x D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature map holds non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]


@dataclass(frozen=True)
class FeatureBag:
    """The exemplar vectors of one segment, shape ``(n_s, D)``."""

    segment_id: int
    exemplars: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.exemplars, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValueError("a feature bag needs at least one exemplar")
        object.__setattr__(self, "exemplars", x)

    @property
    def n(self) -> int:
        return self.exemplars.shape[0]

    @property
    def dim(self) -> int:
        return self.exemplars.shape[1]


@dataclass(frozen=True)
class Signature:
    """Cluster centers ``(m, D)`` with positive weights summing to the bag size."""

    centers: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        if c.shape[0] < 1 or c.shape[0] != w.shape[0]:
            raise ValueError("signature needs one weight per center and at least one center")
        if np.any(w <= 0):
            raise ValueError("signature weights must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "weights", w)


# ------------------------------------------------------------ image filters


def downsample(image, factor: int) -> np.ndarray:
    """Non-overlapping ``factor x factor`` box means; trailing remainder is dropped."""
    if int(factor) != factor or factor < 1:
        raise ValueError("downsample factor must be a positive integer")
    img = np.asarray(image, dtype=np.float64)
    if factor == 1:
        return img.copy()
    h = img.shape[0] // factor * factor
    w = img.shape[1] // factor * factor
    if h == 0 or w == 0:
        raise ValueError("image smaller than the downsample factor")
    img = img[:h, :w]
    shape = (h // factor, factor, w // factor, factor) + img.shape[2:]
    return img.reshape(shape).mean(axis=(1, 3))


def sobel(image) -> np.ndarray:
    """Sobel gradient magnitude with replicate padding."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 3:
        raise ValueError("sobel needs a 2D image of at least 3x3 pixels")
    gx = ndimage.correlate(img, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img, SOBEL_Y, mode="nearest")
    return np.hypot(gx, gy)


def _window_view(img: np.ndarray, size: int) -> np.ndarray:
    # window for pixel p spans p - (size-1)//2 .. p + size//2
    before = (size - 1) // 2
    after = size // 2
    padded = np.pad(img, ((before, after), (before, after)), mode="edge")
    return sliding_window_view(padded, (size, size))


def lacunarity(image, scales=DEFAULT_SCALES) -> np.ndarray:
    """Local gliding-box lacunarity, one channel per scale.

    For scale ``s`` the value at pixel ``p`` is ``E[m^2] / E[m]^2`` over the
    masses ``m`` in the ``s x s`` window at ``p`` (edges replicated). The
    window spans ``p - (s-1)//2`` to ``p + s//2`` along each axis. Windows
    with zero mass get 1.0.

    Returns
    -------
    ndarray of shape (H, W, len(scales))
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("lacunarity needs a 2D image")
    if np.any(img < 0):
        raise ValueError("lacunarity needs a non-negative image")
    out = np.empty(img.shape + (len(scales),))
    for i, s in enumerate(scales):
        if int(s) != s or s < 1 or s > min(img.shape):
            raise ValueError(f"scale {s} must be an integer in 1..{min(img.shape)}")
        win = _window_view(img, int(s))
        first = win.mean(axis=(2, 3))
        second = (win * win).mean(axis=(2, 3))
        lam = np.ones_like(first)
        pos = first > 0
        lam[pos] = second[pos] / first[pos] ** 2
        out[:, :, i] = lam
    return out


def zscore_channels(values: np.ndarray) -> np.ndarray:
    """Z-score each channel over the image; constant channels are left as they are."""
    v = np.asarray(values, dtype=np.float64)
    mean = v.mean(axis=(0, 1))
    std = v.std(axis=(0, 1))
    out = v.copy()
    live = std > 0
    out[:, :, live] = (v[:, :, live] - mean[live]) / std[live]
    return out


def hc_features(image, scales=DEFAULT_SCALES, factor: int = 1, normalize: bool = True) -> FeatureMap:
    """Lacunarity at each scale followed by Sobel magnitude, optionally downsampled first."""
    img = downsample(image, factor)
    stack = np.concatenate([lacunarity(img, scales), sobel(img)[:, :, None]], axis=2)
    if normalize:
        stack = zscore_channels(stack)
    return FeatureMap(stack)


# ---------------------------------------------------------------- file I/O


def save_feature_map(header_path, payload_path, fm: FeatureMap) -> None:
    header = {
        "height": fm.height,
        "width": fm.width,
        "channels": fm.channels,
        "dtype": "f32",
        "layout": "hwc",
    }
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump(header, fh, sort_keys=True)
        fh.write("\n")
    with open(payload_path, "wb") as fh:
        fh.write(fm.values.astype("<f4").tobytes())


def load_feature_map(header_path, payload_path) -> FeatureMap:
    """Load a raw little-endian float32 ``hwc`` feature map and its JSON header."""
    try:
        with open(header_path, encoding="utf-8") as fh:
            header = json.load(fh)
        h, w, d = int(header["height"]), int(header["width"]), int(header["channels"])
        dtype, layout = header["dtype"], header["layout"]
    except (ValueError, KeyError, TypeError) as exc:
        raise FeatureFormatError(f"bad feature header: {exc}") from None
    if dtype != "f32":
        raise FeatureFormatError(f"unknown dtype {dtype!r}")
    if layout != "hwc":
        raise FeatureFormatError(f"unknown layout {layout!r}")
    if min(h, w, d) < 1:
        raise FeatureFormatError("feature dimensions must be positive")
    with open(payload_path, "rb") as fh:
        payload = fh.read()
    if len(payload) != h * w * d * 4:
        raise FeatureFormatError(
            f"length mismatch: payload has {len(payload)} bytes, header implies {h * w * d * 4}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(h, w, d)
    if not np.all(np.isfinite(values)):
        raise FeatureFormatError("payload holds non-finite values")
    return FeatureMap(values)


# -------------------------------------------------- segment representations


def bag_features(fm: FeatureMap, seg: SegmentMap) -> dict[int, FeatureBag]:
    """Gather each segment's pixel feature vectors (row-major pixel order)."""
    if fm.shape != seg.shape:
        raise DimensionError(f"feature map {fm.shape} does not match segment map {seg.shape}")
    flat = fm.values.reshape(-1, fm.channels)
    labels = seg.labels.ravel()
    order = np.argsort(labels, kind="stable")
    ids, starts = np.unique(labels[order], return_index=True)
    chunks = np.split(order, starts[1:])
    return {int(i): FeatureBag(int(i), flat[idx]) for i, idx in zip(ids, chunks)}


def _unique_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows, counts = np.unique(x, axis=0, return_counts=True)
    return rows, counts.astype(np.float64)


def _farthest_point_init(x: np.ndarray, m: int) -> np.ndarray:
    start = np.lexsort(x.T[::-1])[0]
    chosen = [start]
    dist = np.linalg.norm(x - x[start], axis=1)
    while len(chosen) < m:
        nxt = int(np.argmax(dist))
        if dist[nxt] == 0:
            break
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(x - x[nxt], axis=1))
    return x[chosen].copy()


def make_signature(bag: FeatureBag, m: int = DEFAULT_SIGNATURE_SIZE) -> Signature:
    """Compress a bag to at most ``m`` weighted centers.

    Bags with at most ``m`` distinct exemplars pass through (duplicates
    merged). Otherwise k-means runs from a farthest-point seeding that starts
    at the lexicographically smallest exemplar, for a fixed number of Lloyd
    iterations. Weights are cluster sizes, so they sum to ``bag.n``.
    """
    if m < 1:
        raise ValueError("signature size must be at least 1")
    rows, counts = _unique_rows(bag.exemplars)
    if rows.shape[0] <= m:
        return Signature(rows, counts)
    x = bag.exemplars
    centers = _farthest_point_init(x, m)
    for _ in range(KMEANS_ITERATIONS):
        assign = _nearest(x, centers)
        new = centers.copy()
        for j in range(centers.shape[0]):
            members = assign == j
            if members.any():
                new[j] = x[members].mean(axis=0)
        if np.array_equal(new, centers):
            break
        centers = new
    assign = _nearest(x, centers)
    weights = np.bincount(assign, minlength=centers.shape[0]).astype(np.float64)
    keep = weights > 0
    rows, inverse = np.unique(centers[keep], axis=0, return_inverse=True)
    merged = np.zeros(rows.shape[0])
    np.add.at(merged, inverse.ravel(), weights[keep])
    return Signature(rows, merged)


def _nearest(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def channel_range(fm: FeatureMap) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel ``(min, max)`` over the whole map."""
    flat = fm.values.reshape(-1, fm.channels)
    return flat.min(axis=0), flat.max(axis=0)


def histogram(bag: FeatureBag, bins: int = DEFAULT_BINS, value_range=None) -> np.ndarray:
    """Per-channel normalized histograms, shape ``(D, bins)``.

    ``value_range`` is ``(lo, hi)`` with one entry per channel; it defaults
    to the bag's own per-channel extent. Values outside are clamped into the
    end bins. A channel with ``lo == hi`` puts all its mass in the first bin.
    """
    return histogram_counts(bag.exemplars, bins, value_range) / bag.n


def histogram_counts(x: np.ndarray, bins: int = DEFAULT_BINS, value_range=None) -> np.ndarray:
    """Integer per-channel bin counts of ``x`` (shape ``(n, D)``), shape ``(D, bins)``."""
    if bins < 2:
        raise ValueError("need at least two bins")
    dim = x.shape[1]
    if value_range is None:
        lo, hi = x.min(axis=0), x.max(axis=0)
    else:
        lo, hi = (np.broadcast_to(np.asarray(v, dtype=np.float64), (dim,)) for v in value_range)
    if np.any(hi < lo):
        raise ValueError("histogram range has max < min")
    width = np.where(hi > lo, hi - lo, 1.0)
    idx = np.floor((np.clip(x, lo, hi) - lo) / width * bins).astype(np.int64)
    idx = np.clip(idx, 0, bins - 1)
    out = np.zeros((dim, bins), dtype=np.int64)
    for ch in range(dim):
        out[ch] = np.bincount(idx[:, ch], minlength=bins)
    return out
