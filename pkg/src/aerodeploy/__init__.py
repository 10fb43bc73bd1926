"""Metric grounding, BEV traversability mapping and deployment-zone selection."""

from .bev import BevGrid, GridSpec, auto_spec, build_bev, cell_center
from .deployment import (
    DeploymentCandidate,
    DeploymentConfig,
    DeploymentSelector,
    candidates,
    reachable,
    select_deployment,
    select_top_k,
)
from .features import FeatureConfig, FeatureMaps, clearance_map, derive_obstacles, roughness_map, slope_map
from .geometry import Pose, Sim3, apply_sim3_point, apply_sim3_pose
from .grounding import (
    GroundingConfig,
    MetricGrounder,
    anchor_translation,
    fit_sim3_displacements,
    ground,
    relative_displacements,
)
from .semantic import (
    DepthFrame,
    LabeledPointCloud,
    MaskInstance,
    SemanticTarget,
    assign_labels,
    extract_target,
    keyframe_trigger,
    mask_nms,
    uncovered_ratio,
    unproject,
)
from .synth import SceneBundle, synth_scene
from .trajectory import Trajectory
from .trajectory_metrics import TrajectoryErrorReport, ate, evaluate_trajectory, rpe, umeyama_align
from .traversability import (
    CompatibilityTable,
    ThresholdConfig,
    TraversabilityMap,
    TraversabilityMapper,
    TravEvalReport,
    evaluate,
    fuse,
    geo_score,
    penalty_scores,
    sem_score,
)

__version__ = "0.1.0"

__all__ = [
    "anchor_translation",
    "apply_sim3_point",
    "apply_sim3_pose",
    "assign_labels",
    "ate",
    "auto_spec",
    "BevGrid",
    "build_bev",
    "candidates",
    "cell_center",
    "clearance_map",
    "CompatibilityTable",
    "DeploymentCandidate",
    "DeploymentConfig",
    "DeploymentSelector",
    "DepthFrame",
    "derive_obstacles",
    "evaluate",
    "evaluate_trajectory",
    "extract_target",
    "FeatureConfig",
    "FeatureMaps",
    "fit_sim3_displacements",
    "fuse",
    "geo_score",
    "GridSpec",
    "ground",
    "GroundingConfig",
    "keyframe_trigger",
    "LabeledPointCloud",
    "mask_nms",
    "MaskInstance",
    "MetricGrounder",
    "penalty_scores",
    "Pose",
    "reachable",
    "relative_displacements",
    "roughness_map",
    "rpe",
    "SceneBundle",
    "select_deployment",
    "select_top_k",
    "sem_score",
    "SemanticTarget",
    "Sim3",
    "slope_map",
    "synth_scene",
    "ThresholdConfig",
    "Trajectory",
    "TrajectoryErrorReport",
    "TraversabilityMap",
    "TraversabilityMapper",
    "TravEvalReport",
    "umeyama_align",
    "uncovered_ratio",
    "unproject",
]
