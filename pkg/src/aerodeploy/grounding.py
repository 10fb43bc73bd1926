"""Metric grounding of a scale-ambiguous reconstruction from platform egomotion.

Camera centers predicted in the reconstruction frame are related to the
platform's metric positions by an unknown similarity transform.  Matching
inter-frame displacements over several strides gives scale and rotation in
closed form, and the first pose pins down the translation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import (
    DegenerateMotion,
    EmptyTrajectory,
    InsufficientPairs,
    LengthMismatch,
    MalformedInput,
    TooShort,
)
from .geometry import Sim3, apply_sim3_point
from .semantic import LabeledPointCloud
from .trajectory import Trajectory, stack_rotations
from .validation import check_positive, check_positive_int, check_points

DEFAULT_STRIDES = (1, 2, 4, 8)
DEFAULT_MIN_PAIRS = 3
DEFAULT_DEGENERATE_TOL = 1e-6
COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class GroundingConfig:
    strides: tuple = DEFAULT_STRIDES
    min_pairs: int = DEFAULT_MIN_PAIRS
    degenerate_ratio_tol: float = DEFAULT_DEGENERATE_TOL

    def __post_init__(self):
        strides = tuple(int(k) for k in self.strides)
        if not strides:
            raise MalformedInput("at least one stride is required")
        for k in strides:
            check_positive_int(k, "stride")
        object.__setattr__(self, "strides", strides)
        check_positive_int(self.min_pairs, "min_pairs")
        check_positive(self.degenerate_ratio_tol, "degenerate_ratio_tol")


@dataclass(frozen=True, eq=False)
class DisplacementPairs:
    """Matched displacements ``dv[i] <-> dp[i]`` over ``[start[i], start[i] + stride[i]]``."""

    dv: np.ndarray
    dp: np.ndarray
    strides: np.ndarray
    starts: np.ndarray

    def __len__(self) -> int:
        return self.dv.shape[0]


def relative_displacements(traj_v: Trajectory, traj_p: Trajectory,
                           cfg: GroundingConfig = GroundingConfig()) -> DisplacementPairs:
    """Displacement pairs for every stride shorter than the trajectory.

    Strides that do not fit are dropped; if none fit, :class:`TooShort`.
    """
    n = len(traj_v)
    if n != len(traj_p):
        raise LengthMismatch(f"trajectory lengths differ: {n} vs {len(traj_p)}")
    strides = [k for k in cfg.strides if k < n]
    if n < 2 or not strides:
        raise TooShort(f"no stride in {cfg.strides} fits a trajectory of {n} poses")
    Cv, Cp = traj_v.positions, traj_p.positions
    dv, dp, ks, starts = [], [], [], []
    for k in strides:
        dv.append(Cv[k:] - Cv[:-k])
        dp.append(Cp[k:] - Cp[:-k])
        ks.append(np.full(n - k, k))
        starts.append(np.arange(n - k))
    return DisplacementPairs(
        np.concatenate(dv), np.concatenate(dp), np.concatenate(ks), np.concatenate(starts)
    )


def umeyama(src, dst):
    """Least-squares similarity ``dst ~ s R src + t`` (Umeyama 1991).

    Returns ``(s, R, t, sigma)`` where ``sigma`` holds the singular values of
    the cross-covariance.  Raises :class:`DegenerateMotion` when ``src`` has
    no spread.
    """
    src = check_points(src, "source")
    dst = check_points(dst, "target")
    if src.shape != dst.shape:
        raise LengthMismatch("point sets differ in size")
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    xs, xd = src - mu_s, dst - mu_d
    var_s = np.mean(np.sum(xs * xs, axis=1))
    if not var_s > 0:
        raise DegenerateMotion("source points have no spread")
    cov = xd.T @ xs / src.shape[0]
    U, sigma, Vt = np.linalg.svd(cov)
    S = np.ones(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2] = -1.0
    R = (U * S) @ Vt
    s = float(np.dot(sigma, S) / var_s)
    if not s > 0:
        raise DegenerateMotion("recovered scale is not positive")
    t = mu_d - s * (R @ mu_s)
    return s, R, t, sigma


def displacement_residual(pairs: DisplacementPairs, scale: float, R) -> float:
    """``sum ||dp - s R dv||^2`` over all pairs."""
    r = pairs.dp - scale * (pairs.dv @ np.asarray(R).T)
    return float(np.sum(r * r))


def is_collinear(vectors, tol: float = COLLINEAR_TOL) -> bool:
    """True when the centered vectors span at most a line."""
    X = np.asarray(vectors, dtype=float)
    X = X - X.mean(axis=0)
    sv = np.linalg.svd(X, compute_uv=False)
    return bool(sv[0] == 0 or sv[1] <= tol * sv[0])


def fit_sim3_displacements(pairs: DisplacementPairs, min_pairs: int = DEFAULT_MIN_PAIRS,
                           degenerate_ratio_tol: float = DEFAULT_DEGENERATE_TOL):
    """Scale and rotation minimizing ``sum ||dp - s R dv||^2``.

    The two displacement sets are treated as corresponding point clouds and
    aligned with :func:`umeyama`; the translation it returns is discarded.
    For collinear motion the rotation about the motion axis is not
    observable; a warning is issued and the (zero-residual) solution the
    SVD happens to pick is returned.
    """
    if len(pairs) < min_pairs:
        raise InsufficientPairs(f"{len(pairs)} displacement pairs, need {min_pairs}")
    dv = pairs.dv
    mean_norm = float(np.mean(np.linalg.norm(dv, axis=1)))
    centered = dv - dv.mean(axis=0)
    largest = float(np.linalg.svd(centered.T @ centered / len(dv), compute_uv=False)[0])
    # covariance has units of length^2, so compare with the squared mean norm
    if mean_norm == 0 or largest < degenerate_ratio_tol * mean_norm**2:
        raise DegenerateMotion("predicted camera displacements are (near) zero")
    s, R, _, _ = umeyama(dv, pairs.dp)
    if is_collinear(dv):
        warnings.warn(
            "camera motion is collinear; rotation about the motion axis is unconstrained",
            RuntimeWarning,
            stacklevel=2,
        )
    return s, R


def anchor_translation(scale: float, R, traj_v: Trajectory, traj_p: Trajectory) -> np.ndarray:
    """Translation that maps the first reconstructed camera center onto the first platform position."""
    if len(traj_v) == 0 or len(traj_p) == 0:
        raise EmptyTrajectory("cannot anchor on an empty trajectory")
    return traj_p.positions[0] - scale * (np.asarray(R) @ traj_v.positions[0])


def ground_trajectory(traj: Trajectory, T: Sim3) -> Trajectory:
    Rs = np.einsum("ij,njk->nik", T.rotation, traj.rotations)
    return Trajectory(
        traj.timestamps, stack_rotations(Rs), apply_sim3_point(T, traj.positions), "metric"
    )


def ground_cloud(cloud: LabeledPointCloud, T: Sim3) -> LabeledPointCloud:
    if len(cloud) == 0:
        return cloud.with_positions(np.zeros((0, 3)), "metric")
    return cloud.with_positions(apply_sim3_point(T, cloud.positions), "metric")


def ground(traj_v: Trajectory, cloud: LabeledPointCloud, T: Sim3):
    """Apply ``T`` to every pose and point; labels and confidences are kept."""
    return ground_trajectory(traj_v, T), ground_cloud(cloud, T)


class MetricGrounder(BaseEstimator, TransformerMixin):
    """Estimate the reconstruction-to-metric similarity from egomotion.

    ``fit(traj_v, traj_p)`` takes the predicted camera trajectory and the
    platform trajectory (index-aligned).  ``transform`` then accepts a
    :class:`Trajectory`, a :class:`LabeledPointCloud` or an ``(n, 3)``
    array and maps it into the metric frame.

    Fitted attributes: ``scale_``, ``rotation_``, ``translation_``,
    ``transform_`` (a :class:`Sim3`), ``residual_``, ``n_pairs_`` and
    ``collinear_``.
    """

    def __init__(self, strides=DEFAULT_STRIDES, min_pairs=DEFAULT_MIN_PAIRS,
                 degenerate_ratio_tol=DEFAULT_DEGENERATE_TOL):
        self.strides = strides
        self.min_pairs = min_pairs
        self.degenerate_ratio_tol = degenerate_ratio_tol

    def _config(self) -> GroundingConfig:
        return GroundingConfig(tuple(self.strides), self.min_pairs, self.degenerate_ratio_tol)

    def fit(self, traj_v: Trajectory, traj_p: Trajectory):
        cfg = self._config()
        pairs = relative_displacements(traj_v, traj_p, cfg)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            s, R = fit_sim3_displacements(pairs, cfg.min_pairs, cfg.degenerate_ratio_tol)
        self.collinear_ = any(issubclass(w.category, RuntimeWarning) for w in caught)
        for w in caught:
            warnings.warn(w.message, w.category, stacklevel=2)
        t = anchor_translation(s, R, traj_v, traj_p)
        self.scale_ = s
        self.rotation_ = R
        self.translation_ = t
        self.transform_ = Sim3(s, R, t)
        self.residual_ = displacement_residual(pairs, s, R)
        self.n_pairs_ = len(pairs)
        return self

    def _check_fitted(self):
        if not hasattr(self, "transform_"):
            raise NotFittedError("MetricGrounder is not fitted yet; call fit first")

    def transform(self, X):
        self._check_fitted()
        if isinstance(X, Trajectory):
            return ground_trajectory(X, self.transform_)
        if isinstance(X, LabeledPointCloud):
            return ground_cloud(X, self.transform_)
        return apply_sim3_point(self.transform_, X)

    def fit_transform(self, traj_v, traj_p, cloud=None):
        """Fit, then return the grounded trajectory (and cloud when given)."""
        self.fit(traj_v, traj_p)
        if cloud is None:
            return self.transform(traj_v)
        return ground(traj_v, cloud, self.transform_)
