"""Command-line interface.

Exit codes: 0 success, 1 domain error (the error class name is printed on
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as fio
from .bev import NODATA
from .deployment import select_deployment
from .exceptions import AerodeployError, MalformedInput
from .geometry import matrix_to_quat, rotation_angle
from .grounding import MetricGrounder, displacement_residual, relative_displacements
from .io.config import RunConfig
from .semantic import extract_target, lift_frames
from .synth import SCENES, synth_scene, write_bundle
from .trajectory_metrics import evaluate_trajectory
from .traversability import TraversabilityMap, TraversabilityMapper, evaluate


def _load_config(path) -> RunConfig:
    return fio.read_config(path) if path else RunConfig()


def _g(v: float) -> str:
    return repr(float(v))


def cmd_synth(args) -> int:
    params = {}
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise MalformedInput(f"--param expects key=value, got {item!r}")
        params[key.strip()] = float(value)
    if args.n_poses is not None:
        params["n_poses"] = args.n_poses
    bundle = synth_scene(args.scene, args.seed, **params)
    write_bundle(bundle, args.out)
    print(f"wrote scene {args.scene} (seed {args.seed}) to {args.out}")
    return 0


def cmd_ground(args) -> int:
    cfg = _load_config(args.config).grounding
    traj_v = fio.read_trajectory(args.traj_v, "reconstruction")
    traj_p = fio.read_trajectory(args.traj_p, "metric")
    grounder = MetricGrounder(cfg.strides, cfg.min_pairs, cfg.degenerate_ratio_tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        grounder.fit(traj_v, traj_p)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fio.write_trajectory(grounder.transform(traj_v), out / "traj_metric.txt")
    if args.cloud:
        cloud = fio.read_cloud(args.cloud)
        fio.write_cloud(grounder.transform(cloud), out / "cloud_metric.txt")
    pairs = relative_displacements(traj_v, traj_p, cfg)
    fields = {
        "scale": _g(grounder.scale_),
        "rotation_angle_deg": _g(math.degrees(rotation_angle(grounder.rotation_))),
        "rotation_quaternion_xyzw": " ".join(_g(v) for v in matrix_to_quat(grounder.rotation_)),
        "translation": " ".join(_g(v) for v in grounder.translation_),
        "residual": _g(displacement_residual(pairs, grounder.scale_, grounder.rotation_)),
        "n_pairs": grounder.n_pairs_,
        "strides": ",".join(str(k) for k in cfg.strides if k < len(traj_v)),
        "collinear_motion": str(grounder.collinear_).lower(),
    }
    fio.write_report(out / "ground_report.txt", fields,
                     ["residual = sum over displacement pairs of |dp - s R dv|^2"])
    sys.stdout.write(fio.format_report(fields))
    return 0


def cmd_lift(args) -> int:
    frames, masks = fio.read_frames_dir(args.frames)
    iou = None if args.no_nms else args.iou
    cloud, report = lift_frames(frames, masks, iou, args.delta)
    fio.write_cloud(cloud, args.out)
    fields = {
        "n_frames": report.n_frames,
        "n_points": report.n_points,
        "n_skipped_pixels": report.n_skipped,
        "keyframes": ",".join(str(k) for k in report.keyframes),
        "suppressed_masks": ",".join(f"{t}:{i}" for t, i in report.suppressed) or "none",
    }
    for c in args.target_class or []:
        tgt = extract_target(cloud, c, seed=args.seed)
        fields[f"target.{c}.representative"] = " ".join(_g(v) for v in tgt.representative)
        fields[f"target.{c}.confidence"] = _g(tgt.confidence)
        fields[f"target.{c}.method"] = tgt.method
        fields[f"target.{c}.point_count"] = tgt.point_count
    if args.report:
        fio.write_report(args.report, fields)
    sys.stdout.write(fio.format_report(fields))
    return 0


def cmd_map(args) -> int:
    cfg = _load_config(args.config)
    cloud = fio.read_cloud(args.cloud)
    spec = fio.read_ascii_grid(args.like)[0] if args.like else None
    mapper = TraversabilityMapper(
        resolution=cfg.resolution, padding=cfg.padding, grid_spec=spec,
        features=cfg.features, thresholds=cfg.thresholds, compatibility=cfg.compatibility,
        mode=args.mode,
    )
    mapper.fit(cloud)
    grid, feats, tmap = mapper.grid_, mapper.features_, mapper.map_
    spec = grid.spec
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_slope, t_rough, t_clear = mapper.components_
    sentinel = cfg.thresholds.d_soft * 10
    floats = {
        "heights": grid.mean_height,
        "confidence": grid.mean_conf,
        "slope": feats.slope,
        "normals_z": feats.normals_z,
        "roughness": feats.roughness,
        "clearance": feats.clearance,
        "T_slope": t_slope,
        "T_rough": t_rough,
        "T_clear": t_clear,
        "T_geo": tmap.T_geo,
        "T_sem": tmap.T_sem,
        "T": tmap.T,
    }
    for name, raster in floats.items():
        fio.write_ascii_grid(out / f"{name}.asc", raster, spec, inf_value=sentinel)
    fio.write_ascii_grid(out / "classes.asc", grid.dominant_class, spec, integer=True)
    counts = np.where(grid.count > 0, grid.count, NODATA)
    fio.write_ascii_grid(out / "counts.asc", counts, spec, integer=True)
    obst = np.where(grid.has_data, feats.obstacles.astype(int), NODATA)
    fio.write_ascii_grid(out / "obstacles.asc", obst, spec, integer=True)
    fields = {
        "mode": args.mode,
        "ncols": spec.ncols,
        "nrows": spec.nrows,
        "resolution": _g(spec.resolution),
        "n_points": len(cloud),
        "n_dropped": grid.n_dropped,
        "n_data_cells": int(grid.has_data.sum()),
        "n_obstacle_cells": int(feats.obstacles.sum()),
        "n_defined_T": int((~np.isnan(tmap.T)).sum()),
    }
    fio.write_report(out / "map_report.txt", fields, ["slope rasters in radians, distances in meters"])
    sys.stdout.write(fio.format_report(fields))
    return 0


def _parse_xy(text: str):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise MalformedInput(f"goal must be 'x,y', got {text!r}") from exc
    return x, y


def cmd_select(args) -> int:
    cfg = _load_config(args.config).deployment
    spec, T = fio.read_ascii_grid(args.trav)
    tmap = TraversabilityMap(spec, T)
    if args.goal is not None:
        goal = _parse_xy(args.goal)
    else:
        if not args.cloud:
            raise MalformedInput("--goal-class needs --cloud")
        goal = tuple(extract_target(fio.read_cloud(args.cloud), args.goal_class).representative[:2])
    try:
        zones = select_deployment(tmap, goal, cfg)
    except AerodeployError:
        fio.write_zones(args.out, [])
        raise
    fio.write_zones(args.out, zones)
    print(f"goal: {_g(goal[0])},{_g(goal[1])}")
    print(f"zones: {len(zones)}")
    return 0


def cmd_eval_traj(args) -> int:
    gt = fio.read_trajectory(args.gt, "metric")
    est = fio.read_trajectory(args.est, "reconstruction")
    r = evaluate_trajectory(gt, est, args.delta)
    fields = {
        "ate_rmse": f"{r.ate_rmse:.6f}",
        "rpe_trans_rmse": f"{r.rpe_trans_rmse:.6f}",
        "rpe_rot_rmse_deg": f"{r.rpe_rot_rmse:.6f}",
        "n_poses": r.n_poses,
        "delta": r.delta,
        "n_dropped": r.n_dropped,
    }
    comments = [
        "ate: RMSE of camera-center error after Sim(3) Umeyama alignment (meters)",
        "rpe: RMSE over delta-step relative poses; est translations scaled by the alignment scale",
        "poses are index-aligned; timestamp association only when lengths differ",
    ]
    if args.out:
        fio.write_report(args.out, fields, comments)
    sys.stdout.write(fio.format_report(fields, comments))
    return 0


def cmd_eval_trav(args) -> int:
    pspec, T = fio.read_ascii_grid(args.pred)
    gspec, gt = fio.read_ascii_grid(args.gt)
    if pspec != gspec:
        raise MalformedInput("prediction and ground-truth grids are not co-registered")
    r = evaluate(TraversabilityMap(pspec, T), gt, args.threshold)
    fields = {
        "macc": f"{r.macc:.6f}",
        "aacc": f"{r.aacc:.6f}",
        "roc_auc": "nodata" if math.isnan(r.roc_auc) else f"{r.roc_auc:.6f}",
        "mse": f"{r.mse:.6f}",
        "n_cells": r.n_cells,
        "threshold": _g(args.threshold),
    }
    if args.out:
        fio.write_report(args.out, fields)
    sys.stdout.write(fio.format_report(fields))
    return 0


def cmd_render(args) -> int:
    _, raster = fio.read_ascii_grid(args.raster)
    # north up: the last in-memory row is the northern-most
    fio.render_heatmap(raster[::-1], args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aerodeploy",
        description="Metric grounding, traversability mapping and deployment-zone selection.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    s = sub.add_parser("synth", help="generate a synthetic scene bundle")
    s.add_argument("--scene", required=True, choices=SCENES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--n-poses", type=int, help="hover trajectory length (30-80 typical)")
    s.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a numeric scene parameter (repeatable)")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("ground", help="fit scale/rotation from egomotion and ground the reconstruction")
    s.add_argument("--traj-v", required=True, help="reconstructed camera trajectory")
    s.add_argument("--traj-p", required=True, help="platform (metric) trajectory")
    s.add_argument("--cloud", help="reconstructed labeled cloud to ground")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_ground)

    s = sub.add_parser("lift", help="depth frames and instance masks -> labeled cloud")
    s.add_argument("--frames", required=True, help="frame directory")
    s.add_argument("--out", required=True, help="output cloud file")
    s.add_argument("--iou", type=float, default=0.5, help="mask-NMS IoU threshold")
    s.add_argument("--no-nms", action="store_true", help="disable mask suppression")
    s.add_argument("--delta", type=float, default=0.15, help="keyframe uncovered-ratio threshold")
    s.add_argument("--target-class", type=int, action="append", help="report a class target")
    s.add_argument("--seed", type=int, default=0, help="seed for sampled medoids")
    s.add_argument("--report")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("map", help="labeled metric cloud -> BEV and traversability rasters")
    s.add_argument("--cloud", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--config")
    s.add_argument("--like", help="ESRI grid whose geometry the output rasters reuse")
    s.add_argument("--mode", choices=("fusion", "geometric"), default="fusion")
    s.set_defaults(func=cmd_map)

    s = sub.add_parser("select", help="rank deployment zones -> zones.csv")
    s.add_argument("--trav", required=True, help="traversability raster (T.asc)")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--goal", help="goal as x,y in meters")
    g.add_argument("--goal-class", type=int, help="use the medoid of this class in --cloud")
    s.add_argument("--cloud", help="metric cloud for --goal-class")
    s.add_argument("--out", required=True)
    s.add_argument("--config")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("eval-traj", help="ATE / RPE of an estimated trajectory")
    s.add_argument("--gt", required=True)
    s.add_argument("--est", required=True)
    s.add_argument("--delta", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval_traj)

    s = sub.add_parser("eval-trav", help="traversability accuracy against binary labels")
    s.add_argument("--pred", required=True)
    s.add_argument("--gt", required=True)
    s.add_argument("--threshold", type=float, default=0.5)
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval_trav)

    s = sub.add_parser("render", help="ESRI raster -> PPM heatmap")
    s.add_argument("--raster", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AerodeployError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
