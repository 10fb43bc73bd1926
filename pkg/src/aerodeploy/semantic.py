"""Lifting depth frames and instance masks into a labeled point cloud."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ClassAbsent, MalformedInput
from .rng import SplitMix64
from .validation import check_array, check_points

UNLABELED = 0
MEDOID_CAP = 2000
DEFAULT_NMS_IOU = 0.5
DEFAULT_KEYFRAME_DELTA = 0.15


@dataclass(frozen=True, eq=False)
class LabeledPointCloud:
    """Points with a semantic class id and a confidence in [0, 1].

    Class id 0 means "unlabeled".
    """

    positions: np.ndarray
    class_ids: np.ndarray
    confidences: np.ndarray
    frame: str = "reconstruction"

    def __post_init__(self):
        P = check_points(self.positions) if len(self.positions) else np.zeros((0, 3))
        n = P.shape[0]
        c = check_array(self.class_ids, shape=(n,), dtype=np.int64, name="class_ids")
        w = check_array(self.confidences, shape=(n,), name="confidences")
        if np.any(c < 0):
            raise MalformedInput("class ids must be non-negative")
        if np.any((w < 0) | (w > 1)):
            raise MalformedInput("confidences must lie in [0, 1]")
        for name, arr in (("positions", P), ("class_ids", c), ("confidences", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def empty(cls, frame="reconstruction") -> LabeledPointCloud:
        return cls(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), np.zeros(0), frame)

    @classmethod
    def concatenate(cls, clouds, frame=None) -> LabeledPointCloud:
        clouds = list(clouds)
        if not clouds:
            return cls.empty(frame or "reconstruction")
        return cls(
            np.concatenate([c.positions for c in clouds]),
            np.concatenate([c.class_ids for c in clouds]),
            np.concatenate([c.confidences for c in clouds]),
            frame or clouds[0].frame,
        )

    def select(self, mask) -> LabeledPointCloud:
        return LabeledPointCloud(
            self.positions[mask], self.class_ids[mask], self.confidences[mask], self.frame
        )

    def with_positions(self, positions, frame=None) -> LabeledPointCloud:
        return LabeledPointCloud(positions, self.class_ids, self.confidences, frame or self.frame)


@dataclass(frozen=True, eq=False)
class DepthFrame:
    """One depth image with pinhole intrinsics and the extrinsic ``(R, t)``.

    Unprojection follows ``X = R^-1 (K^-1 [u, v, 1]^T D(u, v) - t)``, so
    ``(R, t)`` is the transform taking world points into the camera.  A
    pixel ``(u, v)`` is column ``u``, row ``v``.  Non-positive or
    non-finite depths mean "no data".
    """

    depth: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    confidence: np.ndarray | None = None

    def __post_init__(self):
        D = check_array(self.depth, ndim=2, finite=False, name="depth")
        object.__setattr__(self, "depth", D)
        if not (self.fx > 0 and self.fy > 0):
            raise MalformedInput("focal lengths must be positive")
        object.__setattr__(self, "rotation", check_array(self.rotation, shape=(3, 3)))
        object.__setattr__(self, "translation", check_array(self.translation, shape=(3,)))
        if self.confidence is not None:
            C = check_array(self.confidence, shape=D.shape, name="depth confidence")
            if np.any((C < 0) | (C > 1)):
                raise MalformedInput("depth confidence must lie in [0, 1]")
            object.__setattr__(self, "confidence", C)

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.depth) & (self.depth > 0)


@dataclass(frozen=True, eq=False)
class MaskInstance:
    """A per-frame instance mask; ``mask`` holds per-pixel scores in [0, 1]."""

    instance_id: int
    class_id: int
    mask: np.ndarray
    quality: float = 1.0

    def __post_init__(self):
        M = check_array(self.mask, ndim=2, name="mask")
        if np.any((M < 0) | (M > 1)):
            raise MalformedInput("mask scores must lie in [0, 1]")
        if not 0.0 <= self.quality <= 1.0:
            raise MalformedInput("mask quality must lie in [0, 1]")
        if self.class_id < 0:
            raise MalformedInput("class ids must be non-negative")
        object.__setattr__(self, "mask", M)

    @property
    def support(self) -> np.ndarray:
        return self.mask > 0


def unproject(frame: DepthFrame):
    """Back-project every valid-depth pixel.

    Returns ``(pixels, points, n_skipped)`` where ``pixels`` is ``(n, 2)``
    integer ``(u, v)`` and ``points`` is ``(n, 3)``.
    """
    valid = frame.valid_mask()
    v, u = np.nonzero(valid)
    d = frame.depth[v, u]
    cam = np.stack([(u - frame.cx) / frame.fx * d, (v - frame.cy) / frame.fy * d, d], axis=1)
    # R^-1 == R^T for a rotation
    points = (cam - frame.translation) @ frame.rotation
    pixels = np.stack([u, v], axis=1)
    return pixels, points, int(valid.size - valid.sum())


def mask_iou(a, b) -> float:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return np.count_nonzero(a & b) / union


def mask_nms(masks, iou_threshold: float = DEFAULT_NMS_IOU) -> list[MaskInstance]:
    """Greedy suppression by descending quality (ties: lower instance id first).

    A mask is dropped when its IoU with any already retained mask is at
    least ``iou_threshold``.  The retained list is in visiting order.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError("iou_threshold must lie in (0, 1]")
    order = sorted(masks, key=lambda m: (-m.quality, m.instance_id))
    kept: list[MaskInstance] = []
    for m in order:
        if all(mask_iou(m.support, k.support) < iou_threshold for k in kept):
            kept.append(m)
    return kept


def uncovered_ratio(masks, width: int, height: int) -> float:
    """Fraction of the frame not covered by the union of the masks."""
    covered = np.zeros((height, width), dtype=bool)
    for m in masks:
        if m.mask.shape != (height, width):
            raise MalformedInput("mask shape does not match the frame")
        covered |= m.support
    return 1.0 - covered.sum() / (height * width)


def keyframe_trigger(rho_t: float, rho_ref: float, delta: float) -> bool:
    return rho_t - rho_ref > delta


def select_keyframes(ratios, delta: float = DEFAULT_KEYFRAME_DELTA) -> list[int]:
    """Indices of keyframes given per-frame uncovered ratios.

    Frame 0 always starts a keyframe; each later frame is compared with the
    most recent keyframe's ratio.
    """
    keys: list[int] = []
    for t, rho in enumerate(ratios):
        if not keys or keyframe_trigger(rho, ratios[keys[-1]], delta):
            keys.append(t)
    return keys


def assign_labels(frame: DepthFrame, masks) -> LabeledPointCloud:
    """Unproject a frame and label each point with its highest-scoring mask.

    Equal scores resolve to the lowest instance id.  Pixels under no mask
    get class 0 and confidence 0.  A point's confidence is the winning
    mask's quality, times the frame's depth confidence when present.
    """
    pixels, points, _ = unproject(frame)
    u, v = pixels[:, 0], pixels[:, 1]
    n = points.shape[0]
    classes = np.zeros(n, dtype=np.int64)
    conf = np.zeros(n)
    masks = sorted(masks, key=lambda m: m.instance_id)
    if masks and n:
        for m in masks:
            if m.mask.shape != frame.depth.shape:
                raise MalformedInput("mask shape does not match the frame")
        scores = np.stack([m.mask[v, u] for m in masks])
        winner = np.argmax(scores, axis=0)
        hit = scores[winner, np.arange(n)] > 0
        class_of = np.array([m.class_id for m in masks], dtype=np.int64)
        quality_of = np.array([m.quality for m in masks])
        classes[hit] = class_of[winner[hit]]
        conf[hit] = quality_of[winner[hit]]
    if frame.confidence is not None:
        conf = conf * frame.confidence[v, u]
    return LabeledPointCloud(points, classes, conf)


@dataclass(frozen=True)
class LiftReport:
    n_frames: int
    n_points: int
    n_skipped: int
    keyframes: tuple
    suppressed: tuple  # (frame index, instance id) pairs removed by mask NMS


def lift_frames(frames, frame_masks, iou_threshold=DEFAULT_NMS_IOU, delta=DEFAULT_KEYFRAME_DELTA):
    """Label and concatenate all frames in frame-index order.

    ``frame_masks[t]`` is the list of :class:`MaskInstance` for frame ``t``.
    Pass ``iou_threshold=None`` to skip mask suppression.
    """
    if len(frames) != len(frame_masks):
        raise MalformedInput("one mask list per frame is required")
    clouds, ratios, suppressed = [], [], []
    skipped = 0
    for t, (frame, masks) in enumerate(zip(frames, frame_masks)):
        if iou_threshold is not None:
            kept = mask_nms(masks, iou_threshold)
            kept_ids = {m.instance_id for m in kept}
            suppressed += [(t, m.instance_id) for m in masks if m.instance_id not in kept_ids]
            masks = kept
        ratios.append(uncovered_ratio(masks, frame.width, frame.height))
        clouds.append(assign_labels(frame, masks))
        skipped += int((~frame.valid_mask()).sum())
    cloud = LabeledPointCloud.concatenate(clouds)
    report = LiftReport(
        n_frames=len(frames),
        n_points=len(cloud),
        n_skipped=skipped,
        keyframes=tuple(select_keyframes(ratios, delta)),
        suppressed=tuple(suppressed),
    )
    return cloud, report


@dataclass(frozen=True)
class SemanticTarget:
    class_id: int
    representative: np.ndarray
    confidence: float
    method: str
    point_count: int
    seed: int | None = None


def distance_sums(points: np.ndarray, candidates: np.ndarray | None = None, chunk: int = 512):
    """Sum of Euclidean distances from each candidate to every point."""
    cand = points if candidates is None else candidates
    out = np.empty(cand.shape[0])
    for lo in range(0, cand.shape[0], chunk):
        block = cand[lo : lo + chunk]
        diff = block[:, None, :] - points[None, :, :]
        out[lo : lo + chunk] = np.sqrt((diff * diff).sum(axis=2)).sum(axis=1)
    return out


def medoid_index(points) -> int:
    """Index of the point minimizing summed distances (first on ties)."""
    return int(np.argmin(distance_sums(np.asarray(points, dtype=float))))


def extract_target(cloud: LabeledPointCloud, class_id: int, medoid_cap: int = MEDOID_CAP,
                   seed: int = 0, method: str = "auto") -> SemanticTarget:
    """Representative point and mean confidence of one semantic class.

    ``method="auto"`` computes the exact medoid up to ``medoid_cap`` points
    and the medoid of a seeded uniform subsample above it; ``"centroid"``
    returns the mean position instead.
    """
    sel = cloud.class_ids == class_id
    n = int(sel.sum())
    if n == 0:
        raise ClassAbsent(f"class {class_id} has no points")
    pts = cloud.positions[sel]
    conf = float(np.mean(cloud.confidences[sel]))
    if method == "centroid":
        return SemanticTarget(class_id, pts.mean(axis=0), conf, "centroid", n)
    if method not in ("auto", "medoid"):
        raise ValueError(f"unknown target method {method!r}")
    if n <= medoid_cap:
        rep = pts[medoid_index(pts)]
        return SemanticTarget(class_id, rep.copy(), conf, "medoid", n)
    sample = pts[SplitMix64(seed).sample_indices(n, medoid_cap)]
    rep = sample[medoid_index(sample)]
    return SemanticTarget(class_id, rep.copy(), conf, "sampled-medoid", n, seed)
