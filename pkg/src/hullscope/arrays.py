"""Labeled point clouds, hypercube domains, generators, and file formats.

Everything here is immutable after construction (arrays are marked
read-only), so datasets and boxes can be shared freely across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

_MAGIC = b"HSM1"
_HEADER = struct.Struct("<4sIII")  # magic, rows, cols, reserved


class MatrixFormatError(ValueError):
    """Raised for malformed binary matrix files."""


class CsvFormatError(ValueError):
    """Raised for malformed CSV inputs, with row/column location."""


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Box:
    """Hypercube domain [lower, upper]^dim."""

    lower: float
    upper: float
    dim: int

    def __post_init__(self):
        if not (self.lower < self.upper):
            raise ValueError(f"box needs lower < upper, got [{self.lower}, {self.upper}]")
        if self.dim < 1:
            raise ValueError(f"box dim must be >= 1, got {self.dim}")

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def diameter(self):
        return self.width * float(np.sqrt(self.dim))

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, n, rng):
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


@dataclass(frozen=True)
class Dataset:
    """Point cloud with integer class labels.

    points: (n, d) float64, labels: (n,) small nonnegative ints.
    """

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        lab = np.asarray(self.labels)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be (n>=1, d>=1), got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite values")
        if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
            raise ValueError(
                f"labels must be ({pts.shape[0]},), got shape {lab.shape}"
            )
        if not np.issubdtype(lab.dtype, np.integer):
            if np.any(lab != np.round(lab)):
                raise ValueError("labels must be integers")
        lab = lab.astype(np.int64)
        if np.any(lab < 0):
            raise ValueError("labels must be nonnegative")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "labels", _frozen(lab))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def n_classes(self):
        return int(self.labels.max()) + 1

    def by_label(self, label):
        """Points carrying the given class label."""
        return self.points[self.labels == label]

    def bounding_box(self, pad=0.0):
        lo = float(self.points.min())
        hi = float(self.points.max())
        span = max(hi - lo, 1e-9)
        return Box(lo - pad * span, hi + pad * span, self.d)


def load_csv(path, label_column):
    """Parse a one-header-row CSV into a Dataset.

    `label_column` is a header name or a 0-based column index. Parse
    failures name the offending file line and column.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    except FileNotFoundError:
        raise CsvFormatError(f"no such file: {path}")
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise CsvFormatError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if isinstance(label_column, int) or (
        isinstance(label_column, str) and label_column.lstrip("-").isdigit()
    ):
        label_idx = int(label_column)
        if not (0 <= label_idx < len(header)):
            raise CsvFormatError(
                f"{path}: label column index {label_idx} out of range "
                f"for {len(header)} columns"
            )
    else:
        if label_column not in header:
            raise CsvFormatError(
                f"{path}: unknown label column {label_column!r} "
                f"(header: {', '.join(header)})"
            )
        label_idx = header.index(label_column)
    if len(lines) == 1:
        raise CsvFormatError(f"{path}: no data rows")

    rows = []
    labels = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(header):
            raise CsvFormatError(
                f"{path}: line {lineno} has {len(cells)} cells, expected {len(header)}"
            )
        feat = []
        for j, cell in enumerate(cells):
            col = header[j]
            if j == label_idx:
                try:
                    lab_f = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: line {lineno}, column {col!r}: "
                        f"label {cell!r} is not an integer"
                    )
                if lab_f != int(lab_f):
                    raise CsvFormatError(
                        f"{path}: line {lineno}, column {col!r}: "
                        f"label {cell!r} is not an integer"
                    )
                labels.append(int(lab_f))
            else:
                try:
                    val = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: line {lineno}, column {col!r}: "
                        f"cell {cell!r} is not numeric"
                    )
                if not np.isfinite(val):
                    raise CsvFormatError(
                        f"{path}: line {lineno}, column {col!r}: "
                        f"cell {cell!r} is not finite"
                    )
                feat.append(val)
        rows.append(feat)
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


def save_csv(path, dataset, label_column="label"):
    """Render a Dataset to CSV with 17-significant-digit coordinates."""
    d = dataset.d
    header = ",".join([f"x{i}" for i in range(d)] + [label_column])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row, lab in zip(dataset.points, dataset.labels):
            cells = [format(v, ".17g") for v in row]
            cells.append(str(int(lab)))
            fh.write(",".join(cells) + "\n")


def save_matrix(path, matrix):
    """Write a matrix in the HSM1 binary format.

    Layout: magic "HSM1", rows and cols as unsigned 32-bit little-endian,
    4 reserved zero bytes, then row-major float64 little-endian payload.
    """
    m = np.ascontiguousarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise MatrixFormatError(f"expected a 2-D matrix, got ndim={m.ndim}")
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        raise MatrixFormatError("empty matrix not allowed")
    if rows >= 2**32 or cols >= 2**32:
        raise MatrixFormatError(f"dimension overflow: {rows}x{cols}")
    if not np.all(np.isfinite(m)):
        raise MatrixFormatError("matrix contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, rows, cols, 0))
        fh.write(m.astype("<f8").tobytes(order="C"))


def load_matrix(path):
    """Read an HSM1 matrix; inverse of save_matrix, bit-exact."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise MatrixFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, rows, cols, _reserved = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise MatrixFormatError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
    if rows == 0 or cols == 0:
        raise MatrixFormatError(f"{path}: empty matrix not allowed")
    expected = _HEADER.size + 8 * rows * cols
    if len(blob) != expected:
        raise MatrixFormatError(
            f"{path}: payload is {len(blob) - _HEADER.size} bytes, "
            f"expected {8 * rows * cols} for {rows}x{cols}"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    return flat.reshape(rows, cols).astype(np.float64)


def gaussian_blobs(n_per_class, d, centers, std, seed):
    """Isotropic Gaussian blobs, one class per center, seeded."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise ValueError("need at least one center")
    if centers.shape[1] != d:
        raise ValueError(
            f"centers have dimension {centers.shape[1]}, expected {d}"
        )
    if n_per_class < 1:
        raise ValueError("empty class: n_per_class must be >= 1")
    if not std > 0:
        raise ValueError(f"std must be > 0, got {std}")
    rng = np.random.default_rng(seed)
    parts = []
    labels = []
    for ci, c in enumerate(centers):
        parts.append(c + std * rng.standard_normal((n_per_class, d)))
        labels.append(np.full(n_per_class, ci, dtype=np.int64))
    return Dataset(np.vstack(parts), np.concatenate(labels))


def labeled_blobs(centers, center_labels, n_per_center, std, seed):
    """Gaussian blobs with an explicit class label per center.

    Unlike gaussian_blobs this lets several centers share a class, e.g.
    two parallel diagonal bands that no single coordinate separates.
    """
    centers = np.asarray(centers, dtype=np.float64)
    center_labels = np.asarray(center_labels, dtype=np.int64)
    if centers.ndim != 2 or centers.shape[0] < 1:
        raise ValueError("need at least one center")
    if center_labels.shape != (centers.shape[0],):
        raise ValueError("need one label per center")
    if n_per_center < 1:
        raise ValueError("empty class: n_per_center must be >= 1")
    if not std > 0:
        raise ValueError(f"std must be > 0, got {std}")
    d = centers.shape[1]
    rng = np.random.default_rng(seed)
    parts = []
    labels = []
    for c, lab in zip(centers, center_labels):
        parts.append(c + std * rng.standard_normal((n_per_center, d)))
        labels.append(np.full(n_per_center, lab, dtype=np.int64))
    return Dataset(np.vstack(parts), np.concatenate(labels))


_XOR_QUADRANTS = np.array(
    [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]
)
_XOR_LABELS = np.array([0, 0, 1, 1], dtype=np.int64)


def xor_dataset(n_per_quadrant, noise_std, seed):
    """2-D XOR corners (+-1, +-1): same-sign quadrants labeled 0, mixed 1."""
    if n_per_quadrant < 1:
        raise ValueError("empty class: n_per_quadrant must be >= 1")
    if noise_std < 0:
        raise ValueError(f"noise_std must be >= 0, got {noise_std}")
    rng = np.random.default_rng(seed)
    parts = []
    labels = []
    for base, lab in zip(_XOR_QUADRANTS, _XOR_LABELS):
        pts = np.tile(base, (n_per_quadrant, 1))
        if noise_std > 0:
            pts = pts + noise_std * rng.standard_normal((n_per_quadrant, 2))
        parts.append(pts)
        labels.append(np.full(n_per_quadrant, lab, dtype=np.int64))
    return Dataset(np.vstack(parts), np.concatenate(labels))
