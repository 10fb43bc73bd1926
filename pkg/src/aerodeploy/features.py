"""Terrain features on the BEV height field: slope, roughness, obstacle clearance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .bev import BevGrid
from .exceptions import ConfigInvalid
from .validation import check_positive_int

DEFAULT_K_SLOPE = 2
DEFAULT_K_ROUGH = 5
DEFAULT_MIN_NEIGHBORS = 3
EIGEN_TIE_RTOL = 1e-9
_ROW_BLOCK = 64


@dataclass(frozen=True)
class FeatureConfig:
    """Square window half-widths (in cells) for slope and roughness."""

    k_slope: int = DEFAULT_K_SLOPE
    k_rough: int = DEFAULT_K_ROUGH
    min_neighbors: int = DEFAULT_MIN_NEIGHBORS

    def __post_init__(self):
        check_positive_int(self.k_slope, "k_slope")
        check_positive_int(self.k_rough, "k_rough")
        check_positive_int(self.min_neighbors, "min_neighbors", minimum=3)
        if self.k_rough <= self.k_slope:
            raise ConfigInvalid("k_rough must be larger than k_slope")


@dataclass(frozen=True, eq=False)
class FeatureMaps:
    slope: np.ndarray
    roughness: np.ndarray
    clearance: np.ndarray
    normals_z: np.ndarray
    obstacles: np.ndarray


def _windows(raster: np.ndarray, k: int):
    """Yield ``(row_slice, windows)`` blocks of NaN-padded ``(2k+1)^2`` windows."""
    padded = np.pad(raster, k, constant_values=np.nan)
    win = sliding_window_view(padded, (2 * k + 1, 2 * k + 1))
    for r0 in range(0, raster.shape[0], _ROW_BLOCK):
        r1 = min(r0 + _ROW_BLOCK, raster.shape[0])
        yield slice(r0, r1), win[r0:r1]


def slope_map(grid: BevGrid, cfg: FeatureConfig = FeatureConfig()):
    """Slope (radians) and normal z-component from PCA over each cell's window.

    Each data cell in the window contributes the point
    ``(x_center, y_center, mean_height)``.  The normal is the eigenvector of
    the smallest covariance eigenvalue, flipped so ``n_z >= 0``.  Cells with
    fewer than ``min_neighbors`` data cells in the window, or whose two
    smallest eigenvalues tie (no unique normal), are no-data.
    """
    k, res = cfg.k_slope, grid.spec.resolution
    h = grid.mean_height
    slope = np.full(h.shape, np.nan)
    nz = np.full(h.shape, np.nan)
    offs = (np.arange(2 * k + 1) - k) * res
    dx = np.broadcast_to(offs[None, :], (2 * k + 1, 2 * k + 1))
    dy = np.broadcast_to(offs[:, None], (2 * k + 1, 2 * k + 1))
    for rows, win in _windows(h, k):
        valid = ~np.isnan(win)
        n = valid.sum(axis=(2, 3))
        ok = (n >= cfg.min_neighbors) & grid.has_data[rows]
        if not ok.any():
            continue
        W = win[ok]
        V = valid[ok]
        cnt = n[ok].astype(float)
        pts = np.stack(
            [np.where(V, dx, 0.0), np.where(V, dy, 0.0), np.where(V, W, 0.0)], axis=-1
        ).reshape(W.shape[0], -1, 3)
        mask = V.reshape(W.shape[0], -1, 1)
        mean = pts.sum(axis=1) / cnt[:, None]
        d = (pts - mean[:, None, :]) * mask
        cov = np.einsum("nki,nkj->nij", d, d) / cnt[:, None, None]
        evals, evecs = np.linalg.eigh(cov)
        normal = evecs[:, :, 0]
        tie = (evals[:, 1] - evals[:, 0]) <= EIGEN_TIE_RTOL * np.maximum(evals[:, 2], 1e-300)
        horiz = np.hypot(normal[:, 0], normal[:, 1])
        z = np.abs(normal[:, 2])
        s = np.arctan2(horiz, z)
        zz = z / np.hypot(horiz, z)
        s[tie] = np.nan
        zz[tie] = np.nan
        block_s = slope[rows]
        block_n = nz[rows]
        block_s[ok] = s
        block_n[ok] = zz
    return slope, nz


def roughness_map(grid: BevGrid, cfg: FeatureConfig = FeatureConfig()) -> np.ndarray:
    """Population standard deviation of cell heights over the wider window."""
    k = cfg.k_rough
    h = grid.mean_height
    out = np.full(h.shape, np.nan)
    for rows, win in _windows(h, k):
        valid = ~np.isnan(win)
        n = valid.sum(axis=(2, 3))
        ok = (n >= cfg.min_neighbors) & grid.has_data[rows]
        if not ok.any():
            continue
        W = np.where(valid[ok], win[ok], 0.0)
        cnt = n[ok].astype(float)
        mu = W.sum(axis=(1, 2)) / cnt
        dev = np.where(valid[ok], W - mu[:, None, None], 0.0)
        block = out[rows]
        block[ok] = np.sqrt((dev * dev).sum(axis=(1, 2)) / cnt)
    return out


def derive_obstacles(grid: BevGrid, slope: np.ndarray, tau=None, s_hard: float = np.radians(30.0)):
    """Boolean obstacle raster: incompatible classes, or slope steeper than ``s_hard``.

    ``tau`` is a compatibility table (anything with ``lookup(class_ids)``);
    pass ``None`` for geometry-only obstacles.  Empty cells are never
    obstacles; unknown terrain is handled through no-data instead.
    """
    obst = np.zeros(grid.spec.shape, dtype=bool)
    data = grid.has_data
    if tau is not None:
        obst |= data & (tau.lookup(grid.dominant_class) == 0)
    with np.errstate(invalid="ignore"):
        obst |= data & (slope > s_hard)
    return obst


def obstacle_cells(obstacles: np.ndarray):
    """Obstacle set as a sorted list of ``(row, col)`` tuples."""
    return [tuple(int(i) for i in rc) for rc in np.argwhere(obstacles)]


def _lower_envelope_1d(f: list) -> list:
    """Exact 1D squared distance transform (Felzenszwalb & Huttenlocher)."""
    n = len(f)
    sites = [q for q in range(n) if f[q] != np.inf]
    if not sites:
        return [np.inf] * n
    v = [sites[0]]
    z = [-np.inf]
    for q in sites[1:]:
        while True:
            p = v[-1]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2 * q - 2 * p)
            # z[0] is -inf, so the first site is never popped
            if s <= z[-1]:
                v.pop()
                z.pop()
                continue
            break
        v.append(q)
        z.append(s)
    out = [0.0] * n
    j = 0
    for q in range(n):
        while j + 1 < len(v) and z[j + 1] < q:
            j += 1
        p = v[j]
        out[q] = (q - p) * (q - p) + f[p]
    return out


def squared_distance_transform(obstacles: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance (in cells) to the nearest ``True`` cell.

    Two separable passes, columns then rows; integer-valued and exact.
    """
    nr, nc = obstacles.shape
    f = np.where(obstacles, 0.0, np.inf)
    cols = np.empty_like(f)
    for c in range(nc):
        cols[:, c] = _lower_envelope_1d(f[:, c].tolist())
    out = np.empty_like(f)
    for r in range(nr):
        out[r, :] = _lower_envelope_1d(cols[r, :].tolist())
    return out


def clearance_map(grid: BevGrid, obstacles: np.ndarray) -> np.ndarray:
    """Distance (m) from each data cell's center to the nearest obstacle center.

    With no obstacles every data cell gets ``+inf``; empty cells are NaN.
    """
    if not obstacles.any():
        d = np.full(grid.spec.shape, np.inf)
    else:
        d = np.sqrt(squared_distance_transform(obstacles)) * grid.spec.resolution
    return np.where(grid.has_data, d, np.nan)


def compute_features(grid: BevGrid, cfg: FeatureConfig = FeatureConfig(), tau=None,
                     s_hard: float = np.radians(30.0)) -> FeatureMaps:
    slope, nz = slope_map(grid, cfg)
    rough = roughness_map(grid, cfg)
    obst = derive_obstacles(grid, slope, tau, s_hard)
    return FeatureMaps(slope, rough, clearance_map(grid, obst), nz, obst)
