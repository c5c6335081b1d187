"""Generated scenes with known texture layout, superpixels and weak labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .features import FeatureMap
from .grid import CrispLabels, SegmentMap, WeakLabels

__all__ = [
    "Scene",
    "block_segments",
    "three_texture_scene",
    "texture_image",
    "erode_regions",
    "erode_must_link",
]

# per-texture feature means, 4 channels
TEXTURE_MEANS = np.array(
    [
        [0.0, 0.0, 0.0, 0.0],
        [3.0, 1.0, 0.0, 2.0],
        [0.0, 3.0, 2.0, 1.0],
    ]
)


@dataclass(frozen=True)
class Scene:
    texture: np.ndarray  # ground-truth texture id per pixel, 1..3
    superpixels: SegmentMap
    features: FeatureMap
    weak: WeakLabels
    crisp: CrispLabels


def block_segments(height: int, width: int, rows: int, cols: int) -> SegmentMap:
    """Grid-block superpixels numbered 1..rows*cols in row-major order."""
    r = np.concatenate([np.full(len(c), i) for i, c in enumerate(np.array_split(np.arange(height), rows))])
    c = np.concatenate([np.full(len(x), j) for j, x in enumerate(np.array_split(np.arange(width), cols))])
    return SegmentMap(r[:, None] * cols + c[None, :] + 1)


def _texture_layout(size: int, rows: int, cols: int) -> np.ndarray:
    # cut lines fall on block boundaries so a block partition can match exactly
    row_edges = np.cumsum([len(c) for c in np.array_split(np.arange(size), rows)])
    col_edges = np.cumsum([len(c) for c in np.array_split(np.arange(size), cols)])
    x_cut = col_edges[cols // 2 - 1]
    y_cut = row_edges[rows // 2 - 1]
    tex = np.ones((size, size), dtype=np.int64)
    tex[:y_cut, x_cut:] = 2
    tex[y_cut:, x_cut:] = 3
    return tex


def erode_regions(grid: np.ndarray, pixels: int) -> np.ndarray:
    """Shrink every nonzero region of a label grid by ``pixels`` (4-connected)."""
    out = np.zeros_like(grid)
    if pixels <= 0:
        return grid.copy()
    for rid in np.unique(grid[grid != 0]):
        mask = ndimage.binary_erosion(grid == rid, iterations=pixels, border_value=0)
        out[mask] = rid
    return out


def erode_must_link(wl: WeakLabels, pixels: int) -> WeakLabels:
    """Erode the must-link regions only; cannot-link regions are kept."""
    return WeakLabels(erode_regions(wl.must_link, pixels), wl.cannot_link)


def three_texture_scene(
    size: int = 96,
    rows: int = 5,
    cols: int = 6,
    noise: float = 0.5,
    must_link_margin: int = 4,
    cannot_link_margin: int = 8,
    seed: int = 0,
) -> Scene:
    """A square scene with three textures and ``rows * cols`` block superpixels.

    Texture 1 fills the left half, textures 2 and 3 split the right half
    top/bottom; all borders coincide with block borders. Features are the
    texture's mean vector plus Gaussian noise. Must-link regions are the
    textures shrunk by ``must_link_margin`` pixels, cannot-link regions the
    textures shrunk by ``cannot_link_margin`` pixels. The crisp labels are
    the textures themselves.
    """
    rng = np.random.default_rng(seed)
    tex = _texture_layout(size, rows, cols)
    values = TEXTURE_MEANS[tex - 1] + noise * rng.standard_normal((size, size, TEXTURE_MEANS.shape[1]))
    weak = WeakLabels(erode_regions(tex, must_link_margin), erode_regions(tex, cannot_link_margin))
    return Scene(
        texture=tex,
        superpixels=block_segments(size, size, rows, cols),
        features=FeatureMap(values),
        weak=weak,
        crisp=CrispLabels(tex),
    )


def texture_image(texture: np.ndarray, seed: int = 0) -> np.ndarray:
    """Grayscale image (0..255) with a distinct texture per region id 1..3.

    1: rough speckle, 2: flat, 3: vertical ripples.
    """
    rng = np.random.default_rng(seed)
    h, w = texture.shape
    speckle = rng.gamma(1.0, 60.0, size=(h, w))
    flat = 120.0 + 4.0 * rng.standard_normal((h, w))
    xx = np.arange(w)[None, :].repeat(h, axis=0)
    ripple = 120.0 + 90.0 * np.sin(2 * np.pi * xx / 6.0) + 4.0 * rng.standard_normal((h, w))
    img = np.choose(texture - 1, [speckle, flat, ripple])
    return np.clip(img, 0.0, 255.0)
