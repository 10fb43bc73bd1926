"""Deployment-zone ranking on a traversability map.

Candidates are data cells with ``T >= T_th`` within ``r_max`` of the goal.
They are ranked by ``(1 - lam) T + lam (1 - d / r_max)``, restricted to
cells 8-connected to the goal through passing cells, and thinned greedily
to the top ``K`` with a minimum pairwise separation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bev import cell_center
from .exceptions import ConfigInvalid, GoalOutOfBounds, NoCandidates, OutOfBounds
from .traversability import TraversabilityMap
from .validation import check_positive, check_positive_int, check_unit_interval

NEIGHBORS_8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


@dataclass(frozen=True)
class DeploymentConfig:
    T_th: float = 0.5
    r_max: float = 10.0
    lam: float = 0.3
    K: int = 3
    min_separation: float = 1.0

    def __post_init__(self):
        check_unit_interval(self.T_th, "T_th")
        check_positive(self.r_max, "r_max")
        check_unit_interval(self.lam, "lambda")
        check_positive_int(self.K, "K")
        if not (self.min_separation >= 0 and np.isfinite(self.min_separation)):
            raise ConfigInvalid("min_separation must be a non-negative number")


@dataclass(frozen=True)
class DeploymentCandidate:
    row: int
    col: int
    x: float
    y: float
    score_T: float
    goal_distance: float
    objective: float
    reachable: bool

    @property
    def cell(self) -> tuple[int, int]:
        return (self.row, self.col)


def objective(score_T, goal_distance, lam: float, r_max: float):
    return (1.0 - lam) * score_T + lam * (1.0 - goal_distance / r_max)


def passable(tmap: TraversabilityMap, T_th: float) -> np.ndarray:
    T = tmap.T
    with np.errstate(invalid="ignore"):
        return ~np.isnan(T) & (T >= T_th)


def _check_cell(tmap: TraversabilityMap, cell):
    r, c = int(cell[0]), int(cell[1])
    if not (0 <= r < tmap.spec.nrows and 0 <= c < tmap.spec.ncols):
        raise OutOfBounds(f"cell {cell} outside the map")
    return r, c


def reachable_mask(tmap: TraversabilityMap, start, T_th: float) -> np.ndarray:
    """Cells 8-connected to ``start`` through passing cells (breadth-first search)."""
    r0, c0 = _check_cell(tmap, start)
    ok = passable(tmap, T_th)
    seen = np.zeros_like(ok)
    if not ok[r0, c0]:
        return seen
    nr, nc = ok.shape
    seen[r0, c0] = True
    queue = deque([(r0, c0)])
    while queue:
        r, c = queue.popleft()
        for dr, dc in NEIGHBORS_8:
            rr, cc = r + dr, c + dc
            if 0 <= rr < nr and 0 <= cc < nc and ok[rr, cc] and not seen[rr, cc]:
                seen[rr, cc] = True
                queue.append((rr, cc))
    return seen


def reachable(tmap: TraversabilityMap, from_cell, to_cell, T_th: float) -> bool:
    """Whether an 8-connected path of passing cells joins the two cells."""
    r1, c1 = _check_cell(tmap, to_cell)
    return bool(reachable_mask(tmap, from_cell, T_th)[r1, c1])


def goal_cell(tmap: TraversabilityMap, goal) -> tuple[int, int]:
    gx, gy = float(goal[0]), float(goal[1])
    if not tmap.spec.contains_point(gx, gy):
        raise GoalOutOfBounds(f"goal ({gx}, {gy}) lies outside the map")
    r, c = tmap.spec.cell_index(gx, gy)
    return int(r), int(c)


def candidates(tmap: TraversabilityMap, goal, cfg: DeploymentConfig = DeploymentConfig()):
    """All passing cells within ``r_max`` of ``goal``, in row-major order.

    ``reachable`` is filled in from a single search rooted at the goal cell.
    """
    g = goal_cell(tmap, goal)
    gx, gy = float(goal[0]), float(goal[1])
    reach = reachable_mask(tmap, g, cfg.T_th)
    X, Y = tmap.spec.centers()
    dist = np.hypot(X - gx, Y - gy)
    ok = passable(tmap, cfg.T_th) & (dist <= cfg.r_max)
    out = []
    for r, c in np.argwhere(ok):
        x, y = cell_center(tmap.spec, int(r), int(c))
        t = float(tmap.T[r, c])
        d = float(dist[r, c])
        out.append(
            DeploymentCandidate(
                int(r), int(c), x, y, t, d, float(objective(t, d, cfg.lam, cfg.r_max)),
                bool(reach[r, c]),
            )
        )
    return out


def rank_key(c: DeploymentCandidate):
    return (-c.objective, c.goal_distance, c.row, c.col)


def select_top_k(cands, cfg: DeploymentConfig = DeploymentConfig()):
    """Greedy best-first selection keeping candidates at least ``min_separation`` apart."""
    chosen: list[DeploymentCandidate] = []
    for c in sorted(cands, key=rank_key):
        if len(chosen) == cfg.K:
            break
        if all(np.hypot(c.x - s.x, c.y - s.y) >= cfg.min_separation for s in chosen):
            chosen.append(c)
    return chosen


def select_deployment(tmap: TraversabilityMap, goal, cfg: DeploymentConfig = DeploymentConfig()):
    """Ranked, reachable, well-separated deployment zones; :class:`NoCandidates` if none."""
    zones = select_top_k([c for c in candidates(tmap, goal, cfg) if c.reachable], cfg)
    if not zones:
        raise NoCandidates("no reachable cell passes the threshold within the search radius")
    return zones


class DeploymentSelector(BaseEstimator):
    """Estimator wrapper: ``fit(tmap, goal)`` stores ``candidates_`` and ``zones_``.

    An empty selection is kept as ``zones_ == []`` rather than raised; use
    :func:`select_deployment` for the raising variant.
    """

    def __init__(self, T_th=0.5, r_max=10.0, lam=0.3, K=3, min_separation=1.0):
        self.T_th = T_th
        self.r_max = r_max
        self.lam = lam
        self.K = K
        self.min_separation = min_separation

    def _config(self) -> DeploymentConfig:
        return DeploymentConfig(self.T_th, self.r_max, self.lam, self.K, self.min_separation)

    def fit(self, tmap: TraversabilityMap, goal):
        cfg = self._config()
        self.candidates_ = candidates(tmap, goal, cfg)
        self.zones_ = select_top_k([c for c in self.candidates_ if c.reachable], cfg)
        return self

    def predict(self, tmap=None, goal=None):
        """Selected zones, refitting first when a map and goal are given."""
        if tmap is not None:
            self.fit(tmap, goal)
        if not hasattr(self, "zones_"):
            raise NotFittedError("DeploymentSelector is not fitted yet; call fit first")
        return list(self.zones_)
