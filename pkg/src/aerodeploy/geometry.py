"""Rigid and similarity transforms on 3-vectors.

Rotations are plain 3x3 matrices everywhere inside the package.
Quaternions only appear at the file boundary, in ``(qx, qy, qz, qw)``
order with the Hamilton product convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import MalformedInput
from .validation import check_array, check_points, check_vec3

ROTATION_TOL = 1e-9
REPAIR_TOL = 1e-3


def is_rotation(R, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return bool(
        np.max(np.abs(R.T @ R - np.eye(3))) <= tol and abs(np.linalg.det(R) - 1.0) <= tol
    )


def nearest_rotation(M) -> np.ndarray:
    """Closest proper rotation to ``M`` in the Frobenius sense (polar factor)."""
    M = check_array(M, shape=(3, 3), name="rotation")
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt)) or 1.0])
    return U @ D @ Vt


def repair_rotation(M, tol: float = REPAIR_TOL) -> np.ndarray:
    """Project ``M`` onto SO(3); reject it if the projection moved it by more than ``tol``."""
    M = check_array(M, shape=(3, 3), name="rotation")
    R = nearest_rotation(M)
    if np.max(np.abs(R - M)) > tol:
        raise MalformedInput("matrix is too far from a rotation to repair")
    return R


def rotation_angle(R) -> float:
    """Rotation angle of ``R`` in radians, in [0, pi].

    Uses atan2 of the skew and symmetric parts, which stays accurate for
    angles near zero where ``arccos((tr - 1) / 2)`` loses half the digits.
    """
    R = np.asarray(R, dtype=float)
    skew = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return float(np.arctan2(0.5 * np.linalg.norm(skew), 0.5 * (np.trace(R) - 1.0)))


def axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation about ``axis`` by ``angle`` radians."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotz(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix of the unit quaternion ``(qx, qy, qz, qw)``."""
    x, y, z, w = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R) -> np.ndarray:
    """Unit quaternion ``(qx, qy, qz, qw)`` with ``qw >= 0`` (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    diag = np.diag(R)
    i = int(np.argmax([tr, *diag]))
    if i == 0:
        w = 0.5 * np.sqrt(1.0 + tr)
        f = 0.25 / w
        q = np.array([(R[2, 1] - R[1, 2]) * f, (R[0, 2] - R[2, 0]) * f, (R[1, 0] - R[0, 1]) * f, w])
    elif i == 1:
        x = 0.5 * np.sqrt(1.0 + 2 * diag[0] - tr)
        f = 0.25 / x
        q = np.array([x, (R[0, 1] + R[1, 0]) * f, (R[0, 2] + R[2, 0]) * f, (R[2, 1] - R[1, 2]) * f])
    elif i == 2:
        y = 0.5 * np.sqrt(1.0 + 2 * diag[1] - tr)
        f = 0.25 / y
        q = np.array([(R[0, 1] + R[1, 0]) * f, y, (R[1, 2] + R[2, 1]) * f, (R[0, 2] - R[2, 0]) * f])
    else:
        z = 0.5 * np.sqrt(1.0 + 2 * diag[2] - tr)
        f = 0.25 / z
        q = np.array([(R[0, 2] + R[2, 0]) * f, (R[1, 2] + R[2, 1]) * f, z, (R[1, 0] - R[0, 1]) * f])
    if q[3] < 0:
        q = -q
    return q / np.linalg.norm(q)


def _check_rotation(R) -> np.ndarray:
    R = check_array(R, shape=(3, 3), name="rotation")
    if not is_rotation(R):
        raise MalformedInput("rotation is not orthonormal with determinant +1")
    return R


@dataclass(frozen=True)
class Pose:
    """Camera-to-world rigid pose."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        object.__setattr__(self, "translation", check_vec3(self.translation, "translation"))

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    def inverse(self) -> Pose:
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def __matmul__(self, other: Pose) -> Pose:
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


@dataclass(frozen=True)
class Sim3:
    """Similarity transform ``p -> scale * rotation @ p + translation``."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        s = float(self.scale)
        if not np.isfinite(s) or s <= 0:
            raise MalformedInput(f"Sim3 scale must be positive and finite, got {self.scale!r}")
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        object.__setattr__(self, "translation", check_vec3(self.translation, "translation"))

    @classmethod
    def identity(cls) -> Sim3:
        return cls(1.0, np.eye(3), np.zeros(3))

    def inverse(self) -> Sim3:
        Rt = self.rotation.T
        inv_s = 1.0 / self.scale
        return Sim3(inv_s, Rt, -inv_s * (Rt @ self.translation))

    def compose(self, inner: Sim3) -> Sim3:
        """``self ∘ inner``: apply ``inner`` first."""
        return Sim3(
            self.scale * inner.scale,
            self.rotation @ inner.rotation,
            self.scale * (self.rotation @ inner.translation) + self.translation,
        )

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.scale * self.rotation
        T[:3, 3] = self.translation
        return T


def apply_sim3_point(T: Sim3, p) -> np.ndarray:
    """``s R p + t`` for a single point ``(3,)`` or a batch ``(n, 3)``."""
    single = np.ndim(p) == 1
    P = check_points(p)
    out = T.scale * (P @ T.rotation.T) + T.translation
    return out[0] if single else out


def apply_sim3_pose(T: Sim3, pose: Pose) -> Pose:
    """Map a camera-to-world pose into the target frame of ``T``.

    The rotation is re-projected onto SO(3) so that repeated application
    cannot drift outside the rotation tolerance.
    """
    R = T.rotation @ pose.rotation
    if not is_rotation(R):
        R = nearest_rotation(R)
    return Pose(R, T.scale * (T.rotation @ pose.translation) + T.translation)
