from __future__ import annotations

import numpy as np
import pytest

from aerodeploy import io as fio
from aerodeploy.cli import build_parser, main
from aerodeploy.geometry import quat_to_matrix
from aerodeploy.grounding import relative_displacements
from aerodeploy.semantic import extract_target
from aerodeploy.trajectory import Trajectory

from oracles import brute_deployment
from pipeline import run_pipeline


@pytest.fixture(scope="module")
def culvert_run(tmp_path_factory):
    return run_pipeline(tmp_path_factory.mktemp("culvert"))


class TestPipeline:
    def test_ground_report(self, culvert_run):
        rep = fio.read_report(culvert_run / "ground/ground_report.txt")
        gt = fio.read_report(culvert_run / "bundle/gt_sim3.txt")
        # inputs went through 9-significant-digit text files, so exactness is ~1e-9 relative
        assert abs(float(rep["scale"]) / float(gt["scale"]) - 1) < 1e-7
        assert rep["collinear_motion"] == "false"
        traj_v = fio.read_trajectory(culvert_run / "bundle/traj_v.txt")
        traj_p = fio.read_trajectory(culvert_run / "bundle/traj_p.txt", "metric")
        pairs = relative_displacements(traj_v, traj_p)
        s = float(rep["scale"])
        q = np.array([float(v) for v in rep["rotation_quaternion_xyzw"].split()])
        R = quat_to_matrix(q)
        r = pairs.dp - s * pairs.dv @ R.T
        assert abs(float(np.sum(r * r)) - float(rep["residual"])) < 1e-9

    def test_grounded_trajectory_matches_platform(self, culvert_run):
        a = fio.read_trajectory(culvert_run / "ground/traj_metric.txt", "metric")
        b = fio.read_trajectory(culvert_run / "bundle/traj_p.txt", "metric")
        np.testing.assert_allclose(a.positions, b.positions, atol=1e-6)

    def test_map_outputs(self, culvert_run):
        for name in ("heights", "classes", "slope", "roughness", "clearance", "T", "T_geo",
                     "T_sem", "confidence", "counts", "obstacles"):
            spec, _ = fio.read_ascii_grid(culvert_run / f"map/{name}.asc")
            assert spec.shape == (64, 64)

    def test_zones_match_oracle_and_corridor(self, culvert_run):
        spec, T = fio.read_ascii_grid(culvert_run / "map/T.asc")
        _, classes = fio.read_ascii_grid(culvert_run / "map/classes.asc")
        cloud = fio.read_cloud(culvert_run / "ground/cloud_metric.txt")
        goal = extract_target(cloud, 8).representative[:2]
        expect = brute_deployment(T, (spec.origin_x, spec.origin_y), spec.resolution, goal,
                                  0.5, 10.0, 0.3, 3, 1.0)
        zones = fio.read_zones(culvert_run / "zones.csv")
        assert [(int(z["row"]), int(z["col"])) for z in zones] == expect
        top = zones[0]
        assert 6.0 <= float(top["x"]) <= 10.0 and float(top["y"]) < 13.0
        assert classes[int(top["row"]), int(top["col"])] == 3

    def test_eval_trav(self, culvert_run, capsys):
        code = main(["eval-trav", "--pred", str(culvert_run / "map/T.asc"),
                     "--gt", str(culvert_run / "bundle/gt_trav.asc")])
        assert code == 0
        out = capsys.readouterr().out
        auc = float(out.split("roc_auc: ")[1].split()[0])
        assert auc > 0.9

    def test_render(self, culvert_run, tmp_path):
        assert main(["render", "--raster", str(culvert_run / "map/T.asc"),
                     "--out", str(tmp_path / "T.ppm")]) == 0
        assert (tmp_path / "T.ppm").read_bytes().startswith(b"P6\n64 64\n255\n")


class TestCommands:
    def test_eval_traj_self(self, tmp_path, capsys):
        assert main(["synth", "--scene", "incline", "--seed", "1", "--out", str(tmp_path)]) == 0
        capsys.readouterr()
        t = str(tmp_path / "traj_p.txt")
        assert main(["eval-traj", "--gt", t, "--est", t]) == 0
        out = capsys.readouterr().out
        assert "ate_rmse: 0.000000" in out

    def test_goal_out_of_bounds(self, tmp_path, capsys):
        main(["synth", "--scene", "incline", "--seed", "1", "--out", str(tmp_path / "b")])
        main(["map", "--cloud", str(tmp_path / "b/cloud.txt"), "--out-dir", str(tmp_path / "m")])
        capsys.readouterr()
        code = main(["select", "--trav", str(tmp_path / "m/T.asc"), "--goal", "1e6,1e6",
                     "--out", str(tmp_path / "z.csv")])
        assert code == 1
        assert "GoalOutOfBounds" in capsys.readouterr().err
        assert (tmp_path / "z.csv").read_text().strip() == ",".join(fio.ZONES_HEADER)

    def test_usage_error(self, capsys):
        assert main(["frobnicate"]) == 2
        assert main(["select", "--trav", "x"]) == 2

    def test_missing_file(self, tmp_path, capsys):
        assert main(["render", "--raster", str(tmp_path / "nope.asc"),
                     "--out", str(tmp_path / "o.ppm")]) == 1
        assert "IoError" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.ini"
        cfg.write_text("[deployment]\nmystery = 1\n")
        main(["synth", "--scene", "incline", "--seed", "1", "--out", str(tmp_path / "b")])
        code = main(["map", "--cloud", str(tmp_path / "b/cloud.txt"),
                     "--out-dir", str(tmp_path / "m"), "--config", str(cfg)])
        assert code == 1 and "ConfigInvalid" in capsys.readouterr().err

    def test_lift(self, tmp_path, capsys):
        d = np.full((4, 6), 2.0, np.float32)
        m = np.zeros((4, 6), np.uint8)
        m[:, :3] = 255
        fio.write_depth(tmp_path / "frame00000.depth", d, 1.0, 1.0, 0.0, 0.0)
        fio.write_pgm(tmp_path / fio.mask_filename(0, 1, 8), m, ["quality 0.9"])
        fio.write_trajectory(Trajectory.from_positions(np.zeros((1, 3))), tmp_path / "poses.txt")
        code = main(["lift", "--frames", str(tmp_path), "--out", str(tmp_path / "c.txt"),
                     "--target-class", "8"])
        assert code == 0
        out = capsys.readouterr().out
        assert "n_points: 24" in out and "target.8.method: medoid" in out

    def test_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["map", "--help"])
        assert "--like" in capsys.readouterr().out
