"""Bird's-eye-view binning of a labeled metric point cloud.

Rows grow with y and columns with x: cell ``(row, col)`` covers
``[origin_x + col*res, origin_x + (col+1)*res) x [origin_y + row*res, ...)``.
Empty cells are no-data (NaN for real rasters, ``NODATA`` for the class
raster) and are never zero-filled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EmptyCloud, MalformedInput, OutOfBounds
from .semantic import UNLABELED, LabeledPointCloud
from .validation import check_positive, check_positive_int

NODATA = -9999
DEFAULT_RESOLUTION = 0.25


@dataclass(frozen=True)
class GridSpec:
    origin_x: float
    origin_y: float
    resolution: float
    ncols: int
    nrows: int

    def __post_init__(self):
        check_positive(self.resolution, "resolution")
        check_positive_int(self.ncols, "ncols")
        check_positive_int(self.nrows, "nrows")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def cell_index(self, x, y):
        """``(row, col)`` of the cell containing ``(x, y)``; may be out of range."""
        col = np.floor((np.asarray(x) - self.origin_x) / self.resolution).astype(np.int64)
        row = np.floor((np.asarray(y) - self.origin_y) / self.resolution).astype(np.int64)
        return row, col

    def in_bounds(self, row, col):
        return (row >= 0) & (row < self.nrows) & (col >= 0) & (col < self.ncols)

    def contains_point(self, x: float, y: float) -> bool:
        row, col = self.cell_index(x, y)
        return bool(self.in_bounds(row, col))

    def centers(self):
        """Cell-center coordinate rasters ``(X, Y)``."""
        xs = self.origin_x + (np.arange(self.ncols) + 0.5) * self.resolution
        ys = self.origin_y + (np.arange(self.nrows) + 0.5) * self.resolution
        return np.meshgrid(xs, ys)


def cell_center(spec: GridSpec, row: int, col: int):
    if not (0 <= row < spec.nrows and 0 <= col < spec.ncols):
        raise OutOfBounds(f"cell ({row}, {col}) outside a {spec.nrows}x{spec.ncols} grid")
    return (
        spec.origin_x + (col + 0.5) * spec.resolution,
        spec.origin_y + (row + 0.5) * spec.resolution,
    )


def auto_spec(cloud: LabeledPointCloud, resolution: float = DEFAULT_RESOLUTION,
              padding: float = 0.0) -> GridSpec:
    """Smallest grid, aligned to multiples of ``resolution``, covering the padded xy extent."""
    if len(cloud) == 0:
        raise EmptyCloud("cannot size a grid for an empty cloud")
    check_positive(resolution, "resolution")
    if padding < 0:
        raise MalformedInput("padding must be non-negative")
    xy = cloud.positions[:, :2]
    lo = xy.min(axis=0) - padding
    hi = xy.max(axis=0) + padding
    ox = math.floor(lo[0] / resolution) * resolution
    oy = math.floor(lo[1] / resolution) * resolution
    ncols = int(math.floor((hi[0] - ox) / resolution)) + 1
    nrows = int(math.floor((hi[1] - oy) / resolution)) + 1
    return GridSpec(ox, oy, resolution, ncols, nrows)


@dataclass(frozen=True, eq=False)
class BevGrid:
    """Per-cell aggregates: point count, mean height, dominant class, mean confidence."""

    spec: GridSpec
    count: np.ndarray
    mean_height: np.ndarray
    dominant_class: np.ndarray
    mean_conf: np.ndarray
    n_dropped: int = 0

    def __post_init__(self):
        for name in ("count", "mean_height", "dominant_class", "mean_conf"):
            if getattr(self, name).shape != self.spec.shape:
                raise MalformedInput(f"{name} raster does not match the grid spec")

    @property
    def has_data(self) -> np.ndarray:
        return self.count > 0


def _group_fsum(keys: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Correctly rounded per-key sums; independent of input order."""
    out = np.zeros(n)
    if keys.size == 0:
        return out
    order = np.lexsort((values, keys))
    k, v = keys[order], values[order]
    bounds = np.flatnonzero(np.diff(k)) + 1
    starts = np.concatenate([[0], bounds])
    for s, chunk in zip(starts, np.split(v, bounds)):
        out[k[s]] = math.fsum(chunk)
    return out


def majority_class(cell_keys: np.ndarray, classes: np.ndarray, n: int) -> np.ndarray:
    """Dominant class per cell; unlabeled votes count only when nothing else is present.

    Ties go to the lowest class id.
    """
    out = np.full(n, NODATA, dtype=np.int64)
    if cell_keys.size == 0:
        return out
    pairs, counts = np.unique(np.stack([cell_keys, classes], axis=1), axis=0, return_counts=True)
    labeled = pairs[:, 1] != UNLABELED
    has_label = np.zeros(n, dtype=bool)
    has_label[pairs[labeled, 0]] = True
    keep = labeled | ~has_label[pairs[:, 0]]
    pairs, counts = pairs[keep], counts[keep]
    # sort by cell, then count descending, then class ascending; take the first per cell
    order = np.lexsort((pairs[:, 1], -counts, pairs[:, 0]))
    pairs = pairs[order]
    first = np.concatenate([[True], pairs[1:, 0] != pairs[:-1, 0]])
    out[pairs[first, 0]] = pairs[first, 1]
    return out


def build_bev(cloud: LabeledPointCloud, spec: GridSpec) -> BevGrid:
    """Bin points into ``spec`` and aggregate per cell.

    Points outside the grid are dropped and counted in ``n_dropped``.
    """
    P = cloud.positions
    row, col = spec.cell_index(P[:, 0], P[:, 1])
    inside = spec.in_bounds(row, col)
    n_cells = spec.nrows * spec.ncols
    keys = (row * spec.ncols + col)[inside]
    z = P[inside, 2]
    conf = cloud.confidences[inside]
    classes = cloud.class_ids[inside]

    count = np.bincount(keys, minlength=n_cells)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_h = np.where(count > 0, _group_fsum(keys, z, n_cells) / count, np.nan)
        mean_c = np.where(count > 0, _group_fsum(keys, conf, n_cells) / count, np.nan)
    # guard the rounding of sum/count so the mean never leaves [min z, max z]
    zmin = np.full(n_cells, np.inf)
    zmax = np.full(n_cells, -np.inf)
    np.minimum.at(zmin, keys, z)
    np.maximum.at(zmax, keys, z)
    mean_h = np.where(count > 0, np.clip(mean_h, zmin, zmax), np.nan)
    dom = majority_class(keys, classes, n_cells)
    return BevGrid(
        spec,
        count.reshape(spec.shape),
        mean_h.reshape(spec.shape),
        dom.reshape(spec.shape),
        mean_c.reshape(spec.shape),
        int((~inside).sum()),
    )
