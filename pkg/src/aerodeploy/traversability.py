"""Geometric-semantic traversability scoring and its evaluation against labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bev import DEFAULT_RESOLUTION, NODATA, BevGrid, GridSpec, auto_spec, build_bev
from .exceptions import ConfigInvalid, DegenerateLabels, MalformedInput
from .features import FeatureConfig, FeatureMaps, compute_features
from .semantic import LabeledPointCloud
from .validation import check_same_shape, check_unit_interval

CLASS_NAMES = {
    0: "unlabeled",
    1: "grass",
    2: "soil",
    3: "pavement",
    4: "gravel",
    5: "rock",
    6: "water",
    7: "structure",
    8: "culvert",
}
DEFAULT_COMPATIBILITY = {1: 1.0, 2: 1.0, 3: 1.0, 4: 0.3, 5: 0.0, 6: 0.0, 7: 0.0}
DEFAULT_UNKNOWN_COMPATIBILITY = 0.5
EVAL_THRESHOLD = 0.5


@dataclass(frozen=True)
class ThresholdConfig:
    """Penalty thresholds, weights and the geometry/semantics balance.

    Slope thresholds are stored in degrees (``s_soft_deg``, ``s_hard_deg``);
    ``s_soft``/``s_hard`` give them in radians.
    """

    s_soft_deg: float = 10.0
    s_hard_deg: float = 30.0
    sigma_soft: float = 0.02
    sigma_hard: float = 0.10
    d_hard: float = 0.2
    d_soft: float = 1.0
    w_s: float = 0.4
    w_r: float = 0.3
    w_c: float = 0.3
    alpha: float = 0.6

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigInvalid(f"{name} must be a finite number, got {v!r}")
        if not self.s_soft_deg < self.s_hard_deg:
            raise ConfigInvalid("s_soft must be below s_hard")
        if not self.sigma_soft < self.sigma_hard:
            raise ConfigInvalid("sigma_soft must be below sigma_hard")
        if not self.d_hard < self.d_soft:
            raise ConfigInvalid("d_hard must be below d_soft")
        if min(self.w_s, self.w_r, self.w_c) < 0 or abs(self.w_s + self.w_r + self.w_c - 1) > 1e-9:
            raise ConfigInvalid("weights must be non-negative and sum to 1")
        check_unit_interval(self.alpha, "alpha")

    @property
    def s_soft(self) -> float:
        return math.radians(self.s_soft_deg)

    @property
    def s_hard(self) -> float:
        return math.radians(self.s_hard_deg)


@dataclass(frozen=True)
class CompatibilityTable:
    """Class id -> compatibility in [0, 1]; unknown classes get ``default``."""

    values: dict = field(default_factory=lambda: dict(DEFAULT_COMPATIBILITY))
    default: float = DEFAULT_UNKNOWN_COMPATIBILITY

    def __post_init__(self):
        values = {}
        for k, v in dict(self.values).items():
            if isinstance(k, bool) or int(k) != k or int(k) < 0:
                raise ConfigInvalid(f"class id must be a non-negative integer, got {k!r}")
            values[int(k)] = check_unit_interval(v, f"compatibility of class {k}")
        object.__setattr__(self, "values", dict(sorted(values.items())))
        object.__setattr__(self, "default", check_unit_interval(self.default, "default compatibility"))

    def __call__(self, class_id: int) -> float:
        return self.values.get(int(class_id), self.default)

    def lookup(self, class_ids) -> np.ndarray:
        """Vectorized lookup; ``NODATA`` entries map to NaN."""
        c = np.asarray(class_ids)
        out = np.full(c.shape, self.default, dtype=float)
        for k, v in self.values.items():
            out[c == k] = v
        out[c == NODATA] = np.nan
        return out


def _clip(x):
    return np.clip(x, 0.0, 1.0)


def penalty_scores(features: FeatureMaps, cfg: ThresholdConfig = ThresholdConfig()):
    """Linear slope, roughness and clearance scores clipped to [0, 1].

    Returns ``(T_slope, T_rough, T_clear)``; NaN inputs stay NaN and an
    infinite clearance (no obstacles) scores 1.
    """
    with np.errstate(invalid="ignore"):
        t_slope = _clip((cfg.s_hard - features.slope) / (cfg.s_hard - cfg.s_soft))
        t_rough = _clip((cfg.sigma_hard - features.roughness) / (cfg.sigma_hard - cfg.sigma_soft))
        t_clear = _clip((features.clearance - cfg.d_hard) / (cfg.d_soft - cfg.d_hard))
    return t_slope, t_rough, t_clear


def geo_score(components, cfg: ThresholdConfig = ThresholdConfig()) -> np.ndarray:
    t_slope, t_rough, t_clear = components
    return cfg.w_s * t_slope + cfg.w_r * t_rough + cfg.w_c * t_clear


def sem_score(grid: BevGrid, tau: CompatibilityTable = CompatibilityTable()) -> np.ndarray:
    return np.where(grid.has_data, tau.lookup(grid.dominant_class), np.nan)


@dataclass(frozen=True, eq=False)
class TraversabilityMap:
    """Fused score ``T`` with the geometric and semantic parts kept for inspection."""

    spec: GridSpec
    T: np.ndarray
    T_geo: np.ndarray | None = None
    T_sem: np.ndarray | None = None

    def __post_init__(self):
        if self.T.shape != self.spec.shape:
            raise MalformedInput("traversability raster does not match the grid spec")
        defined = self.T[~np.isnan(self.T)]
        if np.any((defined < 0) | (defined > 1)):
            raise MalformedInput("traversability values must lie in [0, 1]")


def fuse(T_geo, T_sem, p_conf, cfg: ThresholdConfig = ThresholdConfig(),
         spec: GridSpec | None = None) -> TraversabilityMap:
    """``(alpha T_geo + (1 - alpha) T_sem) p_conf`` clipped to [0, 1]; NaN anywhere stays NaN."""
    check_same_shape(T_geo, T_sem, p_conf, names=("T_geo", "T_sem", "p_conf"))
    a = cfg.alpha
    T = _clip((a * np.asarray(T_geo) + (1.0 - a) * np.asarray(T_sem)) * np.asarray(p_conf))
    if spec is None:
        spec = GridSpec(0.0, 0.0, 1.0, T.shape[1], T.shape[0])
    return TraversabilityMap(spec, T, np.asarray(T_geo), np.asarray(T_sem))


@dataclass(frozen=True)
class TravEvalReport:
    macc: float
    aacc: float
    roc_auc: float
    mse: float
    n_cells: int


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their mean rank."""
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    mid = upper - (counts - 1) / 2.0
    return mid[inverse]


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("ROC AUC needs at least one positive and one negative label")
    r = average_ranks(scores)
    return float((r[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def evaluate(pred, gt, threshold: float = EVAL_THRESHOLD) -> TravEvalReport:
    """Accuracy metrics of a traversability raster against a binary label raster.

    Cells that are no-data in either raster (NaN, or ``NODATA`` in ``gt``)
    are ignored.  With single-class labels the AUC is NaN and the mean
    accuracy averages over the classes present.
    """
    T = pred.T if isinstance(pred, TraversabilityMap) else np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    check_same_shape(T, gt, names=("prediction", "ground truth"))
    gt = np.where(gt == NODATA, np.nan, gt)
    keep = ~np.isnan(T) & ~np.isnan(gt)
    t, y = T[keep], gt[keep]
    if not np.all((y == 0) | (y == 1)):
        raise MalformedInput("ground-truth labels must be 0, 1 or no-data")
    n = t.size
    if n == 0:
        raise DegenerateLabels("no co-defined cells to evaluate")
    pos = y == 1
    pred_pos = t >= threshold
    correct = pred_pos == pos
    recalls = [correct[cls].mean() for cls in (pos, ~pos) if cls.any()]
    try:
        auc = roc_auc(t, pos)
    except DegenerateLabels:
        auc = float("nan")
    return TravEvalReport(
        macc=float(np.mean(recalls)),
        aacc=float(correct.mean()),
        roc_auc=auc,
        mse=float(np.mean((t - y) ** 2)),
        n_cells=int(n),
    )


class TraversabilityMapper(BaseEstimator):
    """Point cloud -> BEV grid -> features -> fused traversability map.

    ``mode="fusion"`` uses the full score.  ``mode="geometric"`` is the
    geometry-only baseline: ``alpha`` is forced to 1 and obstacles come from
    slope alone, so semantics never enter the score.

    Fitted attributes: ``grid_``, ``features_``, ``components_`` (the three
    penalty rasters) and ``map_``.
    """

    def __init__(self, resolution=DEFAULT_RESOLUTION, padding=0.0, grid_spec=None,
                 features=None, thresholds=None, compatibility=None, mode="fusion"):
        self.resolution = resolution
        self.padding = padding
        self.grid_spec = grid_spec
        self.features = features
        self.thresholds = thresholds
        self.compatibility = compatibility
        self.mode = mode

    def _settings(self):
        feats = self.features or FeatureConfig()
        th = self.thresholds or ThresholdConfig()
        tau = self.compatibility or CompatibilityTable()
        if self.mode not in ("fusion", "geometric"):
            raise ConfigInvalid(f"unknown mode {self.mode!r}")
        if self.mode == "geometric":
            th = ThresholdConfig(**{**th.__dict__, "alpha": 1.0})
        return feats, th, tau

    def fit(self, cloud: LabeledPointCloud, y=None):
        feats, th, tau = self._settings()
        spec = self.grid_spec or auto_spec(cloud, self.resolution, self.padding)
        grid = build_bev(cloud, spec)
        obstacle_tau = tau if self.mode == "fusion" else None
        features = compute_features(grid, feats, obstacle_tau, th.s_hard)
        comps = penalty_scores(features, th)
        t_geo = geo_score(comps, th)
        t_sem = sem_score(grid, tau)
        self.grid_ = grid
        self.features_ = features
        self.components_ = comps
        self.map_ = fuse(t_geo, t_sem, grid.mean_conf, th, spec)
        return self

    def _check_fitted(self):
        if not hasattr(self, "map_"):
            raise NotFittedError("TraversabilityMapper is not fitted yet; call fit first")

    def predict(self, X) -> np.ndarray:
        """Traversability at query xy locations (NaN outside the grid or on no-data)."""
        self._check_fitted()
        xy = np.atleast_2d(np.asarray(X, dtype=float))[:, :2]
        spec = self.map_.spec
        row, col = spec.cell_index(xy[:, 0], xy[:, 1])
        inside = spec.in_bounds(row, col)
        out = np.full(xy.shape[0], np.nan)
        out[inside] = self.map_.T[row[inside], col[inside]]
        return out

    def evaluate(self, gt, threshold: float = EVAL_THRESHOLD) -> TravEvalReport:
        self._check_fitted()
        return evaluate(self.map_, gt, threshold)
