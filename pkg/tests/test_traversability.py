from __future__ import annotations

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from aerodeploy.bev import NODATA
from aerodeploy.exceptions import ConfigInvalid, DegenerateLabels
from aerodeploy.features import FeatureMaps
from aerodeploy.grounding import ground_cloud
from aerodeploy.synth import synth_scene
from aerodeploy.traversability import (
    CompatibilityTable,
    ThresholdConfig,
    TraversabilityMapper,
    evaluate,
    fuse,
    geo_score,
    penalty_scores,
    roc_auc,
    sem_score,
)

from conftest import grid_from_heights
from oracles import pairwise_auc


def _features(slope_deg=0.0, rough=0.0, clear=np.inf, shape=(1, 1)) -> FeatureMaps:
    def full(v):
        return np.full(shape, v, dtype=float)

    return FeatureMaps(full(np.radians(slope_deg)), full(rough), full(clear), full(1.0),
                       np.zeros(shape, bool))


class TestConfigs:
    def test_defaults(self):
        c = ThresholdConfig()
        assert c.s_soft == pytest.approx(np.radians(10)) and c.alpha == 0.6

    @pytest.mark.parametrize(
        "kw",
        [
            {"s_soft_deg": 30.0},
            {"sigma_soft": 0.2},
            {"d_hard": 2.0},
            {"w_s": 0.5},
            {"alpha": 1.5},
            {"w_s": -0.1, "w_r": 0.8},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ConfigInvalid):
            ThresholdConfig(**kw)

    def test_table(self):
        tau = CompatibilityTable()
        assert tau(1) == 1.0 and tau(5) == 0.0 and tau(4) == 0.3 and tau(42) == 0.5
        assert np.isnan(tau.lookup([NODATA])[0])
        with pytest.raises(ConfigInvalid):
            CompatibilityTable({1: 1.5})


class TestPenalties:
    def test_slope_endpoints_and_midpoint(self):
        for deg, expect in ((30.0, 0.0), (10.0, 1.0), (20.0, 0.5)):
            t_slope, _, _ = penalty_scores(_features(slope_deg=deg))
            assert t_slope[0, 0] == pytest.approx(expect, abs=1e-12)

    def test_sentinel_clearance(self):
        _, _, t_clear = penalty_scores(_features(clear=np.inf))
        assert t_clear[0, 0] == 1.0

    def test_nan_propagates(self):
        t = penalty_scores(_features(rough=np.nan))
        assert np.isnan(geo_score(t)[0, 0])

    def test_geo_examples(self):
        one = np.ones((1, 1))
        assert geo_score((one, one, one))[0, 0] == pytest.approx(1.0)
        got = geo_score((0.5 * one, one, 0 * one))
        assert got[0, 0] == pytest.approx(0.5)
        cfg = ThresholdConfig(w_s=1.0, w_r=0.0, w_c=0.0)
        ts = np.array([[0.37]])
        assert geo_score((ts, one, one), cfg)[0, 0] == 0.37

    def test_monotone(self):
        slopes = np.linspace(0, 40, 9)
        t = [geo_score(penalty_scores(_features(slope_deg=s)))[0, 0] for s in slopes]
        assert np.all(np.diff(t) <= 0)
        clears = np.linspace(0, 2, 9)
        t = [geo_score(penalty_scores(_features(clear=c)))[0, 0] for c in clears]
        assert np.all(np.diff(t) >= 0)


class TestSemantic:
    def test_lookup(self):
        cls = np.array([[1, 5, 9]])
        h = np.array([[0.0, 0.0, np.nan]])
        t = sem_score(grid_from_heights(h, classes=cls))
        assert t[0, 0] == 1.0 and t[0, 1] == 0.0 and np.isnan(t[0, 2])
        t = sem_score(grid_from_heights(np.zeros((1, 1)), classes=np.array([[9]])))
        assert t[0, 0] == 0.5

    def test_relabel_invariant(self):
        cls = np.array([[1, 4, 5]])
        g1 = grid_from_heights(np.zeros((1, 3)), classes=cls)
        g2 = grid_from_heights(np.zeros((1, 3)), classes=cls + 10)
        tau1 = CompatibilityTable({1: 1.0, 4: 0.3, 5: 0.0})
        tau2 = CompatibilityTable({11: 1.0, 14: 0.3, 15: 0.0})
        np.testing.assert_array_equal(sem_score(g1, tau1), sem_score(g2, tau2))


class TestFuse:
    def test_hand(self):
        m = fuse(np.array([[0.5]]), np.array([[1.0]]), np.array([[0.9]]))
        assert m.T[0, 0] == pytest.approx(0.63)

    def test_zero_confidence(self):
        m = fuse(np.array([[0.9]]), np.array([[1.0]]), np.array([[0.0]]))
        assert m.T[0, 0] == 0.0

    def test_alpha_one(self):
        cfg = ThresholdConfig(alpha=1.0)
        g, c = np.array([[0.37]]), np.array([[0.81]])
        assert fuse(g, np.array([[0.0]]), c, cfg).T[0, 0] == 0.37 * 0.81

    def test_all_soft_is_one(self):
        cfg = ThresholdConfig(alpha=1.0)
        f = _features(slope_deg=10.0, rough=0.02, clear=1.0, shape=(3, 3))
        T = fuse(geo_score(penalty_scores(f, cfg), cfg), np.zeros((3, 3)), np.ones((3, 3)), cfg)
        np.testing.assert_allclose(T.T, 1.0, atol=1e-12)

    def test_nodata(self):
        m = fuse(np.array([[np.nan]]), np.array([[1.0]]), np.array([[1.0]]))
        assert np.isnan(m.T[0, 0])


class TestEvaluate:
    def test_perfect(self):
        gt = np.array([[1, 0], [0, 1]])
        r = evaluate(gt.astype(float), gt)
        assert (r.macc, r.aacc, r.roc_auc, r.mse, r.n_cells) == (1.0, 1.0, 1.0, 0.0, 4)

    def test_hand_auc(self):
        assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_ties(self):
        r = evaluate(np.array([[0.6, 0.6]]), np.array([[1, 0]]))
        assert r.aacc == 0.5 and r.roc_auc == 0.5

    def test_single_class(self):
        with pytest.raises(DegenerateLabels):
            roc_auc([0.1, 0.2], [1, 1])
        r = evaluate(np.array([[0.7, 0.2]]), np.array([[1, 1]]))
        assert np.isnan(r.roc_auc) and r.macc == 0.5

    def test_nodata_excluded(self):
        T = np.array([[0.9, np.nan, 0.1]])
        gt = np.array([[1, 0, NODATA]])
        r = evaluate(T, gt)
        assert r.n_cells == 1

    def test_matches_pairwise_oracle(self, rng):
        for shape in ((8, 8), (32, 32), (64, 64)):
            T = np.round(rng.random(shape), 2)     # coarse values force ties
            gt = (rng.random(shape) < 0.4).astype(int)
            assert evaluate(T, gt).roc_auc == pytest.approx(pairwise_auc(T, gt), abs=1e-12)


class TestMapper:
    def test_fit_predict(self):
        b = synth_scene("incline", seed=2)
        cloud = ground_cloud(b.cloud, b.gt_sim3)
        m = TraversabilityMapper(grid_spec=b.gt_spec).fit(cloud)
        assert m.map_.T.shape == b.gt_spec.shape
        vals = m.predict([[8.0, 8.0], [100.0, 100.0]])
        assert 0 <= vals[0] <= 1 and np.isnan(vals[1])
        rep = m.evaluate(b.gt_trav)
        assert rep.n_cells > 0

    def test_geometric_mode_ignores_semantics(self):
        b = synth_scene("smoothed-rocks", seed=1)
        cloud = ground_cloud(b.cloud, b.gt_sim3)
        geo = TraversabilityMapper(grid_spec=b.gt_spec, mode="geometric").fit(cloud)
        relabeled = cloud.__class__(cloud.positions, np.ones(len(cloud), int),
                                    cloud.confidences, cloud.frame)
        geo2 = TraversabilityMapper(grid_spec=b.gt_spec, mode="geometric").fit(relabeled)
        np.testing.assert_array_equal(geo.map_.T, geo2.map_.T)

    def test_sklearn_contract(self):
        m = TraversabilityMapper(resolution=0.5, mode="geometric")
        assert clone(m).get_params()["mode"] == "geometric"
        with pytest.raises(NotFittedError):
            m.predict([[0.0, 0.0]])
        with pytest.raises(ConfigInvalid):
            TraversabilityMapper(mode="magic").fit(synth_scene("incline", 0).cloud)
