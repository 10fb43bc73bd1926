"""Labeled point clouds as text: ``x y z class_id confidence`` per line."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..exceptions import MalformedInput
from ..semantic import LabeledPointCloud


def write_cloud(cloud: LabeledPointCloud, path) -> None:
    lines = [f"# frame: {cloud.frame}", "# x y z class_id confidence"]
    for (x, y, z), c, w in zip(cloud.positions, cloud.class_ids, cloud.confidences):
        lines.append("%.9g %.9g %.9g %d %.9g" % (x, y, z, c, w))
    Path(path).write_text("\n".join(lines) + "\n")


def read_cloud(path, frame: str | None = None) -> LabeledPointCloud:
    """Read a cloud file; the frame tag comes from the ``# frame:`` comment unless given."""
    rows = []
    tag = "reconstruction"
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if s[1:].strip().startswith("frame:"):
                tag = s.split(":", 1)[1].strip()
            continue
        parts = s.split()
        if len(parts) != 5:
            raise MalformedInput(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2]), int(parts[3]), float(parts[4])))
        except ValueError as exc:
            raise MalformedInput(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        return LabeledPointCloud.empty(frame or tag)
    arr = np.array([r[:3] for r in rows])
    classes = np.array([r[3] for r in rows], dtype=np.int64)
    conf = np.array([r[4] for r in rows])
    return LabeledPointCloud(arr, classes, conf, frame or tag)
