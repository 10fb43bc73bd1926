from __future__ import annotations

import numpy as np
import pytest

from aerodeploy.bev import NODATA, BevGrid, GridSpec
from aerodeploy.geometry import Sim3
from aerodeploy.rng import SplitMix64
from aerodeploy.trajectory import Trajectory
from aerodeploy.traversability import TraversabilityMap


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_walk(rng: np.random.Generator, n: int, step: float = 1.0) -> Trajectory:
    """Non-collinear random walk with random orientations."""
    pos = np.cumsum(rng.normal(scale=step, size=(n, 3)), axis=0)
    Rs = np.stack([random_rotation(rng) for _ in range(n)])
    return Trajectory(np.arange(n, dtype=float), Rs, pos, "reconstruction")


def random_sim3(rng: np.random.Generator, s_lo: float = 0.1, s_hi: float = 10.0) -> Sim3:
    s = float(np.exp(rng.uniform(np.log(s_lo), np.log(s_hi))))
    return Sim3(s, random_rotation(rng), rng.normal(scale=10.0, size=3))


def apply_to_traj(T: Sim3, traj: Trajectory, frame: str = "metric") -> Trajectory:
    Rs = np.einsum("ij,njk->nik", T.rotation, traj.rotations)
    pos = T.scale * traj.positions @ T.rotation.T + T.translation
    return Trajectory(traj.timestamps, Rs, pos, frame)


def make_tmap(T: np.ndarray, res: float = 1.0) -> TraversabilityMap:
    T = np.asarray(T, dtype=float)
    return TraversabilityMap(GridSpec(0.0, 0.0, res, T.shape[1], T.shape[0]), T)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def splitmix() -> SplitMix64:
    return SplitMix64(7)


def grid_from_heights(heights, res: float = 1.0, classes=None, conf=None):
    """BevGrid built directly from a height raster (NaN = empty cell)."""
    h = np.asarray(heights, dtype=float)
    data = ~np.isnan(h)
    cls = np.where(data, 1 if classes is None else classes, NODATA).astype(np.int64)
    c = np.where(data, 1.0 if conf is None else conf, np.nan)
    spec = GridSpec(0.0, 0.0, res, h.shape[1], h.shape[0])
    return BevGrid(spec, data.astype(np.int64), h, cls, c)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.summary_lines():
        terminalreporter.write_line(line)
