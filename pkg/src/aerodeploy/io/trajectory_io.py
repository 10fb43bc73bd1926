"""Trajectory text files: ``timestamp tx ty tz qx qy qz qw`` per line."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..exceptions import MalformedInput
from ..geometry import matrix_to_quat, quat_to_matrix
from ..trajectory import Trajectory

QUAT_NORM_TOL = 1e-3


def _fmt(x: float) -> str:
    return "%.9g" % x


def read_trajectory(path, frame: str = "reconstruction") -> Trajectory:
    """Parse a trajectory file.

    Quaternions are renormalized; one whose norm is off by more than
    ``QUAT_NORM_TOL`` is rejected as malformed.
    """
    ts, Rs, Ps = [], [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise MalformedInput(f"{path}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
        if not all(np.isfinite(vals)):
            raise MalformedInput(f"{path}:{lineno}: non-finite value")
        q = np.array(vals[4:])
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > QUAT_NORM_TOL:
            raise MalformedInput(f"{path}:{lineno}: quaternion norm {norm:.6g} is not 1")
        ts.append(vals[0])
        Ps.append(vals[1:4])
        Rs.append(quat_to_matrix(q / norm))
    if not ts:
        return Trajectory(np.zeros(0), np.zeros((0, 3, 3)), np.zeros((0, 3)), frame)
    return Trajectory(np.array(ts), np.array(Rs), np.array(Ps), frame)


def format_trajectory(traj: Trajectory) -> str:
    lines = [f"# frame: {traj.frame}", "# timestamp tx ty tz qx qy qz qw"]
    for t, R, p in zip(traj.timestamps, traj.rotations, traj.positions):
        q = matrix_to_quat(R)
        lines.append(" ".join(_fmt(v) for v in (t, *p, *q)))
    return "\n".join(lines) + "\n"


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(format_trajectory(traj))
