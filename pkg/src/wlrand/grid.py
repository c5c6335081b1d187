"""Label grids, weak labels, contingency tables and grid file I/O.

All grids are row-major with a top-left origin. In every *reference* grid
(must-link, cannot-link, crisp classes) the id 0 means "unlabeled"; segment
maps have no unlabeled notion and may use 0 as an ordinary segment id.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridFormatError",
    "DimensionError",
    "SegmentMap",
    "WeakLabels",
    "CrispLabels",
    "ContingencyTable",
    "ValidationReport",
    "build_contingency",
    "validate_pair",
    "load_grid",
    "save_grid",
    "load_segment_map",
    "save_segment_map",
    "read_pgm",
    "write_pgm",
    "read_csv_grid",
    "write_csv_grid",
]

PGM_MAXVAL = 65535


class GridFormatError(ValueError):
    """A grid file could not be parsed under its declared format."""


class DimensionError(ValueError):
    """Two grids that must share a shape do not."""


def _as_label_grid(values, name="labels") -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2D grid, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(np.mod(arr, 1) == 0):
            arr = arr.astype(np.int64)
        else:
            raise ValueError(f"{name} must hold integer ids")
    if arr.min() < 0:
        raise ValueError(f"{name} must hold non-negative ids")
    arr = np.array(arr, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{what}: shape {a.shape} does not match {b.shape}")


@dataclass(frozen=True)
class SegmentMap:
    """A partition of an image grid into segments.

    Parameters
    ----------
    labels : array-like of shape (height, width)
        Non-negative integer segment id per pixel. Ids are kept verbatim and
        need not be contiguous.
    """

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", _as_label_grid(self.labels, "segment map"))

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def ids(self) -> np.ndarray:
        """Sorted distinct segment ids."""
        return np.unique(self.labels)

    @property
    def K(self) -> int:
        return int(self.ids.size)

    def sizes(self) -> dict[int, int]:
        """Pixel count ``n_k`` per segment id."""
        ids, counts = np.unique(self.labels, return_counts=True)
        return {int(i): int(c) for i, c in zip(ids, counts)}

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(ids, index_grid)`` with ids re-indexed to ``0..K-1``."""
        ids, inv = np.unique(self.labels, return_inverse=True)
        return ids, inv.reshape(self.labels.shape)

    def __eq__(self, other):
        if not isinstance(other, SegmentMap):
            return NotImplemented
        return self.labels.shape == other.labels.shape and bool(
            np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def _region_ids(grid: np.ndarray) -> np.ndarray:
    ids = np.unique(grid)
    return ids[ids != 0]


@dataclass(frozen=True)
class WeakLabels:
    """Must-link and cannot-link label grids (0 = unlabeled).

    The two grids are independent: a pixel may be in a must-link region, a
    cannot-link region, both, or neither.
    """

    must_link: np.ndarray
    cannot_link: np.ndarray

    def __post_init__(self):
        ml = _as_label_grid(self.must_link, "must-link grid")
        cl = _as_label_grid(self.cannot_link, "cannot-link grid")
        _check_same_shape(ml, cl, "weak labels")
        object.__setattr__(self, "must_link", ml)
        object.__setattr__(self, "cannot_link", cl)

    @property
    def shape(self) -> tuple[int, int]:
        return self.must_link.shape

    @property
    def L(self) -> int:
        return int(_region_ids(self.must_link).size)

    @property
    def U(self) -> int:
        return int(_region_ids(self.cannot_link).size)


@dataclass(frozen=True)
class CrispLabels:
    """Crisp class labels (0 = unlabeled); at least one pixel must be labeled."""

    classes: np.ndarray

    def __post_init__(self):
        cls = _as_label_grid(self.classes, "crisp labels")
        if not np.any(cls != 0):
            raise ValueError("crisp labels contain no labeled pixel")
        object.__setattr__(self, "classes", cls)

    @property
    def shape(self) -> tuple[int, int]:
        return self.classes.shape

    @property
    def J(self) -> int:
        return int(_region_ids(self.classes).size)


@dataclass(frozen=True)
class ContingencyTable:
    """Intersection counts between segments and reference regions.

    ``counts[k, r]`` is the number of pixels with segment id ``row_ids[k]``
    and reference id ``col_ids[r]``. Reference id 0 (unlabeled) never gets a
    column. Every segment of the map gets a row, even when it holds no
    labeled pixel.
    """

    counts: np.ndarray
    row_ids: np.ndarray
    col_ids: np.ndarray
    row_sums: np.ndarray = field(init=False)
    col_sums: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_sums", counts.sum(axis=1))
        object.__setattr__(self, "col_sums", counts.sum(axis=0))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def build_contingency(seg: SegmentMap, ref) -> ContingencyTable:
    """Count ``|S_k ∩ R_r|`` for every segment ``k`` and reference region ``r``.

    Parameters
    ----------
    seg : SegmentMap
    ref : array-like of shape seg.shape
        Reference label grid, 0 = unlabeled.
    """
    ref = _as_label_grid(ref, "reference grid")
    _check_same_shape(seg.labels, ref, "contingency")
    row_ids, rows = np.unique(seg.labels.ravel(), return_inverse=True)
    mask = ref.ravel() != 0
    col_ids, cols = np.unique(ref.ravel()[mask], return_inverse=True)
    flat = rows[mask].astype(np.int64) * col_ids.size + cols
    counts = np.bincount(flat, minlength=row_ids.size * col_ids.size)
    counts = counts.reshape(row_ids.size, col_ids.size)
    return ContingencyTable(counts, row_ids, col_ids)


@dataclass
class ValidationReport:
    valid: bool
    errors: list[str]
    warnings: list[str]
    K: int | None
    L: int | None
    U: int | None

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "errors": list(self.errors),
            "warnings": list(self.warnings),
            "K": self.K,
            "L": self.L,
            "U": self.U,
        }


def _noncontiguous(ids: np.ndarray) -> bool:
    return ids.size > 0 and int(ids[-1]) != ids.size


def validate_pair(seg: SegmentMap, wl: WeakLabels) -> ValidationReport:
    """Check that a segment map and weak labels can be scored together.

    Never raises; problems are listed in the returned report. The pair is
    scoreable iff ``report.valid``.
    """
    errors: list[str] = []
    warns: list[str] = []
    if seg.shape != wl.shape:
        errors.append(f"dimension mismatch: segment map {seg.shape} vs labels {wl.shape}")
    ml_ids = _region_ids(wl.must_link)
    cl_ids = _region_ids(wl.cannot_link)
    if ml_ids.size == 0 and cl_ids.size == 0:
        errors.append("empty labels: no must-link or cannot-link region")
    if _noncontiguous(ml_ids):
        warns.append("non-contiguous region ids in must-link grid")
    if _noncontiguous(cl_ids):
        warns.append("non-contiguous region ids in cannot-link grid")
    return ValidationReport(
        valid=not errors,
        errors=errors,
        warnings=warns,
        K=seg.K,
        L=int(ml_ids.size),
        U=int(cl_ids.size),
    )


# ---------------------------------------------------------------- file I/O


def _pgm_tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise GridFormatError("malformed PGM header: truncated")
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) or ASCII (P2) PGM file into an integer array."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise GridFormatError(f"malformed PGM header: bad magic {magic!r}")
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise GridFormatError(f"malformed PGM header: {exc}") from None
    if width <= 0 or height <= 0 or not 0 < maxval <= PGM_MAXVAL:
        raise GridFormatError("malformed PGM header: bad dimensions or maxval")
    if magic == b"P2":
        try:
            values = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError:
            raise GridFormatError("non-integer sample in ASCII PGM") from None
        if values.size != width * height:
            raise GridFormatError(
                f"dimension mismatch: header says {width}x{height}, payload has {values.size} samples"
            )
        return values.reshape(height, width)
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[pos:]
    if len(payload) != expected:
        raise GridFormatError(
            f"dimension mismatch: header says {width}x{height}, payload has {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    if arr.size and int(arr.max()) > maxval:
        raise GridFormatError("sample exceeds maxval")
    return arr.astype(np.int64)


def write_pgm(path, grid) -> None:
    """Write a grid as binary P5 PGM with maxval 65535 (big-endian samples)."""
    arr = np.asarray(grid)
    if arr.ndim != 2:
        raise ValueError("PGM grids must be 2D")
    if arr.size and (arr.min() < 0 or arr.max() > PGM_MAXVAL):
        raise ValueError("PGM samples must lie in 0..65535")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n{PGM_MAXVAL}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.astype(">u2").tobytes())


def read_csv_grid(path) -> np.ndarray:
    """Read a headerless comma-separated grid of non-negative integers."""
    rows = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([int(cell) for cell in line.split(",")])
            except ValueError:
                raise GridFormatError(f"non-integer cell on line {lineno}") from None
    if not rows:
        raise GridFormatError("empty CSV grid")
    width = len(rows[0])
    for i, row in enumerate(rows, 1):
        if len(row) != width:
            raise GridFormatError(f"dimension mismatch: row {i} has {len(row)} cells, expected {width}")
    arr = np.array(rows, dtype=np.int64)
    if arr.min() < 0:
        raise GridFormatError("negative cell value")
    return arr


def write_csv_grid(path, grid) -> None:
    arr = np.asarray(grid, dtype=np.int64)
    with open(path, "w", encoding="ascii", newline="") as fh:
        for row in arr:
            fh.write(",".join(str(int(v)) for v in row))
            fh.write("\n")


def _infer_format(path, fmt):
    if fmt is not None:
        if fmt not in ("pgm16", "pgm", "csv"):
            raise ValueError(f"unknown grid format {fmt!r}")
        return "csv" if fmt == "csv" else "pgm16"
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".csv":
        return "csv"
    if ext in (".pgm", ".pnm"):
        return "pgm16"
    raise ValueError(f"cannot infer grid format from {path!r}; pass fmt='pgm16' or 'csv'")


def load_grid(path, fmt=None) -> np.ndarray:
    """Load a raw integer grid (``fmt`` in ``{'pgm16', 'csv'}``, else by extension)."""
    if _infer_format(path, fmt) == "csv":
        return read_csv_grid(path)
    return read_pgm(path)


def save_grid(path, grid, fmt=None) -> None:
    if _infer_format(path, fmt) == "csv":
        write_csv_grid(path, grid)
    else:
        write_pgm(path, grid)


def load_segment_map(path, fmt=None) -> SegmentMap:
    """Load a segment map from a 16-bit PGM or CSV file. Ids are kept verbatim."""
    return SegmentMap(load_grid(path, fmt))


def save_segment_map(path, seg: SegmentMap, fmt=None) -> None:
    save_grid(path, seg.labels, fmt)

