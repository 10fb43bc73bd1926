"""Deterministic synthetic scenes standing in for field data.

Every scene is a height field over a 16 m x 16 m square (64 x 64 cells at
0.25 m) sampled with stratified jittered points, each carrying a class
label and a confidence.  A hovering camera trajectory is generated in the
metric frame; the bundle stores it, and the cloud, in a reconstruction
frame related to metric by a random similarity ``gt_sim3``.  The platform
trajectory is ``gt_sim3`` applied to the reconstructed one.

All randomness comes from :class:`~aerodeploy.rng.SplitMix64` seeded with
the scene seed, drawn in a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bev import GridSpec
from .exceptions import UnknownScene
from .geometry import Sim3, apply_sim3_point, matrix_to_quat, rotz
from .io import write_ascii_grid, write_cloud, write_report, write_trajectory
from .rng import SplitMix64
from .semantic import LabeledPointCloud
from .trajectory import Trajectory, stack_rotations

SCENES = ("incline", "step", "rockfield", "smoothed-rocks", "culvert")

GRASS, SOIL, PAVEMENT, GRAVEL, ROCK, WATER, STRUCTURE, CULVERT = 1, 2, 3, 4, 5, 6, 7, 8
HAZARD_CLASSES = (ROCK, WATER, STRUCTURE)
GT_MAX_SLOPE_DEG = 25.0

EXTENT = 16.0
RESOLUTION = 0.25

# culvert layout (metres)
CORRIDOR_X = (6.0, 10.0)
APRON_X = (6.5, 9.5)
APRON_Y = (10.0, 13.0)
WALL_X = (5.5, 10.5)
WALL_Y = (13.0, 14.0)
WALL_HEIGHT = 2.0
EMBANKMENT_Y = 13.0
EMBANKMENT_DEG = 35.0

DEFAULTS = {
    "incline": {"theta_deg": 20.0, "noise": 0.0, "per_cell": 3},
    "step": {"step_height": 1.0, "step_x": 8.0, "noise": 0.0, "per_cell": 2},
    "rockfield": {"n_rocks": 25, "flatten": 1.0, "noise": 0.003, "per_cell": 2},
    "smoothed-rocks": {"n_rocks": 25, "flatten": 0.1, "noise": 0.003, "per_cell": 2},
    "culvert": {"n_rocks": 40, "flatten": 1.0, "noise": 0.003, "per_cell": 2},
}
COMMON_DEFAULTS = {"n_poses": 40, "altitude": 15.0}


@dataclass(eq=False)
class SceneBundle:
    cloud: LabeledPointCloud
    traj_v: Trajectory
    traj_p: Trajectory
    gt_sim3: Sim3
    gt_trav: np.ndarray
    gt_spec: GridSpec
    manifest: dict = field(default_factory=dict)
    gt_slope: np.ndarray | None = None
    goal_class: int | None = None


@dataclass(frozen=True)
class Rock:
    x: float
    y: float
    radius: float
    height: float


def _stratified_xy(rng: SplitMix64, per_cell: int) -> np.ndarray:
    """Jittered sub-cell samples kept away from cell borders."""
    n_cells = int(round(EXTENT / RESOLUTION))
    m = per_cell
    sub = RESOLUTION / m
    idx = np.arange(n_cells * m)
    gx, gy = np.meshgrid(idx, idx)
    jitter = rng.uniform(0.1, 0.9, size=(gx.size, 2))
    x = (gx.ravel() + jitter[:, 0]) * sub
    y = (gy.ravel() + jitter[:, 1]) * sub
    return np.stack([x, y], axis=1)


def _rocks(rng: SplitMix64, n: int, allowed) -> list[Rock]:
    rocks: list[Rock] = []
    while len(rocks) < n:
        r = rng.uniform(0.4, 0.9)
        x = rng.uniform(r, EXTENT - r)
        y = rng.uniform(r, EXTENT - r)
        h = 0.6 * r
        if allowed(x, y, r):
            rocks.append(Rock(x, y, r, h))
    return rocks


def _rock_height(x, y, rocks, flatten: float):
    """Height and rock mask of the union of rock caps."""
    z = np.zeros_like(x)
    inside = np.zeros(x.shape, dtype=bool)
    for rk in rocks:
        d2 = ((x - rk.x) ** 2 + (y - rk.y) ** 2) / rk.radius**2
        hit = d2 < 1.0
        cap = np.where(hit, flatten * rk.height * np.sqrt(np.clip(1.0 - d2, 0.0, None)), 0.0)
        z = np.maximum(z, cap)
        inside |= hit
    return z, inside


def _terrain(name: str, x, y, p, rocks):
    """Heights and classes at ``(x, y)`` for the named scene (metric frame)."""
    z = np.zeros_like(x)
    cls = np.full(x.shape, GRASS, dtype=np.int64)
    if name == "incline":
        z = x * math.tan(math.radians(p["theta_deg"]))
    elif name == "step":
        z = np.where(x >= p["step_x"], p["step_height"], 0.0)
    elif name in ("rockfield", "smoothed-rocks"):
        z, inside = _rock_height(x, y, rocks, p["flatten"])
        cls[inside] = ROCK
    elif name == "culvert":
        zr, inside = _rock_height(x, y, rocks, p["flatten"])
        z = zr
        cls[inside] = ROCK
        corridor = (x >= CORRIDOR_X[0]) & (x < CORRIDOR_X[1]) & (y < EMBANKMENT_Y)
        cls[corridor] = PAVEMENT
        apron = (x >= APRON_X[0]) & (x < APRON_X[1]) & (y >= APRON_Y[0]) & (y < APRON_Y[1])
        cls[apron] = CULVERT
        bank = y >= EMBANKMENT_Y
        z = np.where(bank, (y - EMBANKMENT_Y) * math.tan(math.radians(EMBANKMENT_DEG)), z)
        cls[bank] = GRASS
        wall = (x >= WALL_X[0]) & (x < WALL_X[1]) & (y >= WALL_Y[0]) & (y < WALL_Y[1])
        z = np.where(wall, WALL_HEIGHT, z)
        cls[wall] = STRUCTURE
    return z, cls


def _analytic_slope_deg(name: str, x, y, p) -> np.ndarray:
    """Terrain slope at cell centers, where it has a closed form (else 0)."""
    s = np.zeros_like(x)
    if name == "incline":
        s[:] = p["theta_deg"]
    elif name == "step":
        edge = np.abs(x - p["step_x"]) < RESOLUTION
        s[edge] = 90.0
    elif name == "culvert":
        bank = y >= EMBANKMENT_Y
        s[bank] = EMBANKMENT_DEG
    return s


def _ground_truth(name: str, p, rocks):
    """Binary traversability at cell centers from the analytic terrain."""
    n = int(round(EXTENT / RESOLUTION))
    c = (np.arange(n) + 0.5) * RESOLUTION
    X, Y = np.meshgrid(c, c)
    _, cls = _terrain(name, X, Y, p, rocks)
    slope = _analytic_slope_deg(name, X, Y, p)
    gt = np.ones(X.shape)
    gt[np.isin(cls, HAZARD_CLASSES)] = 0.0
    gt[slope > GT_MAX_SLOPE_DEG] = 0.0
    if name == "culvert":
        # wall footprint is a vertical structure face on all sides
        gt[(Y >= WALL_Y[0]) & (Y < WALL_Y[1]) & (X >= WALL_X[0]) & (X < WALL_X[1])] = 0.0
    return gt, slope


def _hover_trajectory(rng: SplitMix64, n: int, altitude: float):
    """Down-looking camera hovering over the scene center with small excursions."""
    phase = rng.uniform(0.0, 2 * math.pi)
    theta = phase + np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    cx = EXTENT / 2
    pos = np.stack(
        [
            cx + 3.0 * np.cos(theta),
            cx + 2.0 * np.sin(2 * theta),
            altitude + 1.5 * np.sin(theta) + 0.5 * np.cos(3 * theta),
        ],
        axis=1,
    )
    down = np.diag([1.0, -1.0, -1.0])
    yaw = rng.uniform(-0.3, 0.3, size=n)
    Rs = np.array([rotz(a) @ down for a in yaw])
    return Trajectory(np.arange(n) * 0.5, Rs, pos, "metric")


def _random_sim3(rng: SplitMix64) -> Sim3:
    s = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    R = rng.rotation()
    t = rng.normal(0.0, 10.0, size=3)
    return Sim3(s, R, t)


def _transform_traj(traj: Trajectory, T: Sim3, frame: str) -> Trajectory:
    Rs = stack_rotations(np.einsum("ij,njk->nik", T.rotation, traj.rotations))
    return Trajectory(traj.timestamps, Rs, apply_sim3_point(T, traj.positions), frame)


def _culvert_allowed(x, y, r):
    margin = r + RESOLUTION
    outside_corridor = x <= CORRIDOR_X[0] - margin or x >= CORRIDOR_X[1] + margin
    return outside_corridor and y <= EMBANKMENT_Y - margin


def synth_scene(name: str, seed: int = 0, **params) -> SceneBundle:
    """Build the named scene; identical ``(name, seed, params)`` give identical bundles."""
    if name not in SCENES:
        raise UnknownScene(f"unknown scene {name!r}; choose from {', '.join(SCENES)}")
    p = {**COMMON_DEFAULTS, **DEFAULTS[name]}
    unknown = set(params) - set(p)
    if unknown:
        raise ValueError(f"unknown scene parameters: {sorted(unknown)}")
    p.update(params)
    rng = SplitMix64(seed)

    rocks: list[Rock] = []
    if name in ("rockfield", "smoothed-rocks"):
        rocks = _rocks(rng, int(p["n_rocks"]), lambda x, y, r: True)
    elif name == "culvert":
        rocks = _rocks(rng, int(p["n_rocks"]), _culvert_allowed)

    xy = _stratified_xy(rng, int(p["per_cell"]))
    z, cls = _terrain(name, xy[:, 0], xy[:, 1], p, rocks)
    if p["noise"] > 0:
        z = z + rng.normal(0.0, p["noise"], size=z.shape)
    conf = rng.uniform(0.85, 0.95, size=z.shape)
    metric_pts = np.column_stack([xy, z])

    traj_m = _hover_trajectory(rng, int(p["n_poses"]), float(p["altitude"]))
    gt_sim3 = _random_sim3(rng)
    inv = gt_sim3.inverse()
    traj_v = _transform_traj(traj_m, inv, "reconstruction")
    traj_p = _transform_traj(traj_v, gt_sim3, "metric")
    cloud = LabeledPointCloud(apply_sim3_point(inv, metric_pts), cls, conf, "reconstruction")

    gt, slope = _ground_truth(name, p, rocks)
    n = gt.shape[0]
    spec = GridSpec(0.0, 0.0, RESOLUTION, n, n)
    manifest = {
        "scene": name,
        "seed": seed,
        "prng": "splitmix64-counter",
        **{k: p[k] for k in sorted(p)},
        "n_points": len(cloud),
        "n_rocks_placed": len(rocks),
    }
    return SceneBundle(
        cloud=cloud,
        traj_v=traj_v,
        traj_p=traj_p,
        gt_sim3=gt_sim3,
        gt_trav=gt,
        gt_spec=spec,
        manifest=manifest,
        gt_slope=np.radians(slope) if name in ("incline", "step") else None,
        goal_class=CULVERT if name == "culvert" else None,
    )


def write_bundle(bundle: SceneBundle, out_dir) -> None:
    """Write a bundle as plain files into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cloud(bundle.cloud, out / "cloud.txt")
    write_trajectory(bundle.traj_v, out / "traj_v.txt")
    write_trajectory(bundle.traj_p, out / "traj_p.txt")
    write_ascii_grid(out / "gt_trav.asc", bundle.gt_trav, bundle.gt_spec, integer=True)
    if bundle.gt_slope is not None:
        write_ascii_grid(out / "gt_slope.asc", bundle.gt_slope, bundle.gt_spec)
    T = bundle.gt_sim3
    q = matrix_to_quat(T.rotation)
    write_report(
        out / "gt_sim3.txt",
        {
            "scale": repr(T.scale),
            "quaternion_xyzw": " ".join(repr(float(v)) for v in q),
            "translation": " ".join(repr(float(v)) for v in T.translation),
        },
    )
    fields = dict(bundle.manifest)
    if bundle.goal_class is not None:
        fields["goal_class"] = bundle.goal_class
    write_report(out / "manifest.txt", fields)
