from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerodeploy.bev import NODATA, GridSpec, auto_spec, build_bev, cell_center
from aerodeploy.exceptions import EmptyCloud, OutOfBounds
from aerodeploy.semantic import LabeledPointCloud

GRASS, ROCK = 1, 5


def _cloud(xyz, cls=None, conf=None) -> LabeledPointCloud:
    xyz = np.asarray(xyz, dtype=float)
    n = len(xyz)
    cls = np.ones(n, int) if cls is None else cls
    conf = np.ones(n) if conf is None else conf
    return LabeledPointCloud(xyz, cls, conf)


def _random_cloud(rng, n=400):
    xyz = np.column_stack([rng.uniform(0, 5, n), rng.uniform(0, 4, n), rng.normal(size=n)])
    return _cloud(xyz, rng.integers(0, 4, n), rng.uniform(0, 1, n))


def _same(a, b):
    for name in ("count", "mean_height", "dominant_class", "mean_conf"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


class TestAutoSpec:
    def test_single_point(self):
        s = auto_spec(_cloud([[0.0, 0, 0]]), 1.0, 0.0)
        assert (s.origin_x, s.origin_y, s.ncols, s.nrows) == (0.0, 0.0, 1, 1)

    def test_extent(self):
        s = auto_spec(_cloud([[0.0, 0, 0], [9.5, 0, 0]]), 1.0, 0.0)
        assert s.ncols == 10

    def test_padding(self):
        base = auto_spec(_cloud([[0.3, 0.3, 0], [4.2, 3.1, 0]]), 1.0, 0.0)
        pad = auto_spec(_cloud([[0.3, 0.3, 0], [4.2, 3.1, 0]]), 1.0, 2.0)
        assert pad.origin_x <= base.origin_x - 2 and pad.origin_y <= base.origin_y - 2
        assert pad.ncols >= base.ncols + 4 and pad.nrows >= base.nrows + 4

    def test_covers_all_points(self, rng):
        c = _random_cloud(rng)
        assert build_bev(c, auto_spec(c, 0.3)).n_dropped == 0

    def test_empty(self):
        with pytest.raises(EmptyCloud):
            auto_spec(LabeledPointCloud.empty())


class TestCellCenter:
    def test_examples(self):
        assert cell_center(GridSpec(0, 0, 1, 2, 2), 0, 0) == (0.5, 0.5)
        assert cell_center(GridSpec(10, 20, 0.5, 8, 8), 2, 3) == (11.75, 21.25)

    def test_inverse_of_binning(self):
        spec = GridSpec(-3.0, 2.0, 0.25, 12, 9)
        for r in range(9):
            for c in range(12):
                x, y = cell_center(spec, r, c)
                assert tuple(int(v) for v in spec.cell_index(x, y)) == (r, c)

    def test_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            cell_center(GridSpec(0, 0, 1, 2, 2), 2, 0)


class TestBuild:
    spec = GridSpec(0.0, 0.0, 1.0, 2, 1)

    def test_mean_height(self):
        g = build_bev(_cloud([[0.5, 0.5, 1], [0.5, 0.5, 2], [0.5, 0.5, 3]]), self.spec)
        assert g.mean_height[0, 0] == 2.0
        assert np.isnan(g.mean_height[0, 1]) and g.dominant_class[0, 1] == NODATA

    def test_majority(self):
        g = build_bev(_cloud(np.full((3, 3), 0.5), [GRASS, GRASS, ROCK]), self.spec)
        assert g.dominant_class[0, 0] == GRASS

    def test_tie_to_lowest(self):
        g = build_bev(_cloud(np.full((2, 3), 0.5), [ROCK, GRASS]), self.spec)
        assert g.dominant_class[0, 0] == GRASS

    def test_unlabeled_excluded(self):
        g = build_bev(_cloud(np.full((3, 3), 0.5), [0, 0, ROCK]), self.spec)
        assert g.dominant_class[0, 0] == ROCK
        g = build_bev(_cloud(np.full((2, 3), 0.5), [0, 0]), self.spec)
        assert g.dominant_class[0, 0] == 0

    def test_mean_conf_all_points(self):
        g = build_bev(_cloud(np.full((3, 3), 0.5), [GRASS, GRASS, ROCK], [0.9, 0.6, 0.0]), self.spec)
        assert g.mean_conf[0, 0] == pytest.approx(0.5)

    def test_dropped(self, rng):
        c = _random_cloud(rng)
        g = build_bev(c, GridSpec(1.0, 1.0, 0.5, 4, 3))
        assert int(g.count.sum()) + g.n_dropped == len(c)

    def test_permutation_and_duplication_invariant(self, rng):
        c = _random_cloud(rng, 1000)
        spec = auto_spec(c, 0.5)
        g = build_bev(c, spec)
        p = rng.permutation(len(c))
        _same(g, build_bev(c.select(p), spec))
        doubled = LabeledPointCloud.concatenate([c, c.select(p)])
        gd = build_bev(doubled, spec)
        np.testing.assert_array_equal(gd.count, 2 * g.count)
        for name in ("mean_height", "dominant_class", "mean_conf"):
            np.testing.assert_array_equal(getattr(gd, name), getattr(g, name))

    def test_mean_within_range(self, rng):
        c = _random_cloud(rng, 2000)
        spec = auto_spec(c, 0.5)
        g = build_bev(c, spec)
        r, col = spec.cell_index(c.positions[:, 0], c.positions[:, 1])
        for rr, cc in zip(*np.nonzero(g.count)):
            z = c.positions[(r == rr) & (col == cc), 2]
            assert z.min() <= g.mean_height[rr, cc] <= z.max()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 3.99), st.floats(0, 2.99), st.floats(-1e3, 1e3),
                          st.integers(0, 4)), min_size=1, max_size=60),
       st.randoms(use_true_random=False))
def test_partition_independent(points, r):
    arr = np.array([p[:3] for p in points])
    cls = np.array([p[3] for p in points])
    c = _cloud(arr, cls, np.full(len(arr), 0.3))
    spec = GridSpec(0.0, 0.0, 1.0, 4, 3)
    order = list(range(len(arr)))
    r.shuffle(order)
    _same(build_bev(c, spec), build_bev(c.select(np.array(order)), spec))
