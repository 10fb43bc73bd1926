"""Trajectory accuracy: absolute and relative pose error after Sim(3) alignment.

Conventions (the usual ones for this metric suite): both errors are RMSE,
ATE is measured on camera centers after Umeyama alignment with scale, RPE
compares relative poses ``delta`` frames apart with the estimate's
translations multiplied by the alignment scale, and rotation errors are
reported in degrees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import LengthMismatch, TooShort
from .geometry import Sim3, apply_sim3_point
from .grounding import umeyama
from .trajectory import Trajectory


@dataclass(frozen=True)
class TrajectoryErrorReport:
    ate_rmse: float
    rpe_trans_rmse: float
    rpe_rot_rmse: float
    n_poses: int
    delta: int = 1
    n_dropped: int = 0


def _check_pair(gt: Trajectory, est: Trajectory):
    if len(gt) != len(est):
        raise LengthMismatch(f"trajectory lengths differ: {len(gt)} vs {len(est)}")


def umeyama_align(gt: Trajectory, est: Trajectory) -> Sim3:
    """Similarity taking the estimated camera centers onto the ground truth.

    Collinear trajectories are accepted: the alignment is then not unique
    but any minimizer gives the same (zero, when noise-free) residual.
    """
    _check_pair(gt, est)
    if len(gt) < 3:
        raise TooShort("alignment needs at least 3 poses")
    if np.array_equal(gt.positions, est.positions):
        # Exact minimizer; the SVD path would return a scale off by an ulp.
        return Sim3(1.0, np.eye(3), np.zeros(3))
    s, R, t, _ = umeyama(est.positions, gt.positions)
    return Sim3(s, R, t)


def ate(gt: Trajectory, est: Trajectory) -> float:
    """RMSE of camera-center error after aligning ``est`` to ``gt``."""
    T = umeyama_align(gt, est)
    err = gt.positions - apply_sim3_point(T, est.positions)
    return float(np.sqrt(np.mean(np.sum(err * err, axis=1))))


def _batch_angles(Rs: np.ndarray) -> np.ndarray:
    skew = np.stack(
        [Rs[:, 2, 1] - Rs[:, 1, 2], Rs[:, 0, 2] - Rs[:, 2, 0], Rs[:, 1, 0] - Rs[:, 0, 1]], axis=1
    )
    tr = np.trace(Rs, axis1=1, axis2=2)
    return np.arctan2(0.5 * np.linalg.norm(skew, axis=1), 0.5 * (tr - 1.0))


def _relative(Rs, Ps, delta):
    Ri = Rs[:-delta]
    Rrel = np.einsum("nji,njk->nik", Ri, Rs[delta:])
    trel = np.einsum("nji,nj->ni", Ri, Ps[delta:] - Ps[:-delta])
    return Rrel, trel


def rpe(gt: Trajectory, est: Trajectory, delta: int = 1):
    """``(translation RMSE in meters, rotation RMSE in degrees)`` over ``delta``-step relative poses."""
    _check_pair(gt, est)
    if delta < 1 or len(gt) <= delta:
        raise TooShort(f"delta={delta} needs more than {delta} poses")
    scale = umeyama_align(gt, est).scale if len(gt) >= 3 else 1.0
    Rq, tq = _relative(gt.rotations, gt.positions, delta)
    Rp, tp = _relative(est.rotations, scale * est.positions, delta)
    # E = Q^-1 P: rotation Rq^T Rp, translation Rq^T (tp - tq)
    Re = np.einsum("nji,njk->nik", Rq, Rp)
    te = np.einsum("nji,nj->ni", Rq, tp - tq)
    trans = np.sqrt(np.mean(np.sum(te * te, axis=1)))
    rot = np.degrees(np.sqrt(np.mean(_batch_angles(Re) ** 2)))
    return float(trans), float(rot)


def associate(gt: Trajectory, est: Trajectory, tol: float | None = None):
    """Match poses by nearest timestamp within ``tol``.

    ``tol`` defaults to half the median frame interval of ``gt``.  Each
    estimated pose is used at most once (the closer match wins).  Returns
    index arrays ``(gt_idx, est_idx)``.
    """
    if tol is None:
        tol = 0.5 * float(np.median(np.diff(gt.timestamps))) if len(gt) > 1 else np.inf
    ts = est.timestamps
    j = np.clip(np.searchsorted(ts, gt.timestamps), 1, max(len(ts) - 1, 1))
    left = np.clip(j - 1, 0, len(ts) - 1)
    right = np.clip(j, 0, len(ts) - 1)
    pick = np.where(
        np.abs(ts[left] - gt.timestamps) <= np.abs(ts[right] - gt.timestamps), left, right
    )
    dt = np.abs(ts[pick] - gt.timestamps)
    best: dict[int, int] = {}
    for i in np.argsort(dt, kind="stable"):
        if dt[i] <= tol and pick[i] not in best:
            best[int(pick[i])] = int(i)
    gi = np.array(sorted(best.values()), dtype=int)
    ei = np.array([k for k, _ in sorted(best.items(), key=lambda kv: kv[1])], dtype=int)
    return gi, ei


def evaluate_trajectory(gt: Trajectory, est: Trajectory, delta: int = 1) -> TrajectoryErrorReport:
    """ATE and RPE; trajectories of different length are timestamp-associated first."""
    dropped = 0
    if len(gt) != len(est):
        gi, ei = associate(gt, est)
        dropped = (len(gt) - len(gi)) + (len(est) - len(ei))
        gt, est = gt.subset(gi), est.subset(ei)
    t_err, r_err = rpe(gt, est, delta)
    return TrajectoryErrorReport(ate(gt, est), t_err, r_err, len(gt), delta, dropped)
