"""Timestamped pose sequences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import MalformedInput
from .geometry import Pose, is_rotation, nearest_rotation
from .validation import check_array

FRAMES = ("reconstruction", "metric")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Camera-to-world poses stored as stacked arrays.

    ``rotations`` is ``(n, 3, 3)``, ``positions`` (the camera centers) is
    ``(n, 3)``.  Timestamps must be strictly increasing.
    """

    timestamps: np.ndarray
    rotations: np.ndarray
    positions: np.ndarray
    frame: str = "reconstruction"

    def __post_init__(self):
        ts = check_array(self.timestamps, ndim=1, name="timestamps")
        n = ts.shape[0]
        Rs = check_array(self.rotations, shape=(n, 3, 3), name="rotations")
        Ps = check_array(self.positions, shape=(n, 3), name="positions")
        if n > 1 and not np.all(np.diff(ts) > 0):
            raise MalformedInput("trajectory timestamps must be strictly increasing")
        for R in Rs:
            if not is_rotation(R):
                raise MalformedInput("trajectory contains an invalid rotation")
        if self.frame not in FRAMES:
            raise MalformedInput(f"unknown frame tag {self.frame!r}")
        for name, arr in (("timestamps", ts), ("rotations", Rs), ("positions", Ps)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_positions(cls, positions, timestamps=None, frame="reconstruction") -> Trajectory:
        """Trajectory with identity orientations, e.g. for position-only egomotion."""
        P = check_array(positions, ndim=2, name="positions")
        n = P.shape[0]
        ts = np.arange(n, dtype=float) if timestamps is None else timestamps
        return cls(ts, np.broadcast_to(np.eye(3), (n, 3, 3)).copy(), P, frame)

    @classmethod
    def from_poses(cls, timestamps, poses, frame="reconstruction") -> Trajectory:
        poses = list(poses)
        Rs = np.array([p.rotation for p in poses]).reshape(-1, 3, 3)
        Ps = np.array([p.translation for p in poses]).reshape(-1, 3)
        return cls(np.asarray(timestamps, dtype=float), Rs, Ps, frame)

    def __len__(self) -> int:
        return self.timestamps.shape[0]

    def pose(self, i: int) -> Pose:
        return Pose(self.rotations[i], self.positions[i])

    def poses(self):
        return [self.pose(i) for i in range(len(self))]

    def subset(self, idx) -> Trajectory:
        idx = np.asarray(idx, dtype=int)
        return Trajectory(self.timestamps[idx], self.rotations[idx], self.positions[idx], self.frame)

    def with_frame(self, frame: str) -> Trajectory:
        return Trajectory(self.timestamps, self.rotations, self.positions, frame)

    def equals(self, other: Trajectory, atol: float = 0.0) -> bool:
        return (
            len(self) == len(other)
            and self.frame == other.frame
            and np.allclose(self.timestamps, other.timestamps, rtol=0, atol=atol)
            and np.allclose(self.rotations, other.rotations, rtol=0, atol=atol)
            and np.allclose(self.positions, other.positions, rtol=0, atol=atol)
        )


def stack_rotations(Rs) -> np.ndarray:
    """Re-orthonormalize each rotation whose drift exceeds the tolerance."""
    Rs = np.array(Rs, dtype=float)
    for i, R in enumerate(Rs):
        if not is_rotation(R):
            Rs[i] = nearest_rotation(R)
    return Rs
