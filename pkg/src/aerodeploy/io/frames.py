"""Depth rasters, PGM instance masks and frame directories for ``lift``.

Depth file: one text line ``DEPTH <W> <H> fx fy cx cy`` followed by
``W*H`` little-endian float32 values, row-major.

Masks: binary PGM (P5, maxval 255); pixel value / 255 is the mask score.
An optional header comment ``# quality <q>`` carries the mask quality
(default 1).  Files are named ``frame{t:05}_inst{k:04}_class{c}.pgm``.

A frame directory holds ``frame{t:05}.depth``, optional
``frame{t:05}_conf.depth`` depth-confidence rasters, the masks, and
``poses.txt`` in trajectory format whose ``i``-th line is frame ``i``'s
extrinsic ``(R, t)``.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from ..exceptions import MalformedInput
from ..semantic import DepthFrame, MaskInstance
from .trajectory_io import read_trajectory

MASK_RE = re.compile(r"^frame(\d{5})_inst(\d{4})_class(\d+)\.pgm$")
DEPTH_RE = re.compile(r"^frame(\d{5})\.depth$")


def mask_filename(frame: int, instance: int, class_id: int) -> str:
    return f"frame{frame:05d}_inst{instance:04d}_class{class_id}.pgm"


def parse_mask_filename(name: str):
    m = MASK_RE.match(name)
    if not m:
        raise MalformedInput(f"not a mask file name: {name!r}")
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def write_depth(path, depth, fx, fy, cx, cy) -> None:
    D = np.asarray(depth, dtype="<f4")
    h, w = D.shape
    head = f"DEPTH {w} {h} {fx!r} {fy!r} {cx!r} {cy!r}\n".encode()
    Path(path).write_bytes(head + D.tobytes(order="C"))


def read_depth(path):
    """Return ``(depth, (fx, fy, cx, cy))``."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise MalformedInput(f"{path}: missing DEPTH header")
    parts = data[:nl].decode("ascii", "replace").split()
    if len(parts) != 7 or parts[0] != "DEPTH":
        raise MalformedInput(f"{path}: bad DEPTH header")
    try:
        w, h = int(parts[1]), int(parts[2])
        intr = tuple(float(p) for p in parts[3:])
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    body = data[nl + 1 :]
    if len(body) != 4 * w * h:
        raise MalformedInput(f"{path}: expected {4 * w * h} bytes of depth, got {len(body)}")
    depth = np.frombuffer(body, dtype="<f4").reshape(h, w).astype(np.float64)
    return depth, intr


def write_pgm(path, image, comments=()) -> None:
    img = np.asarray(image, dtype=np.uint8)
    h, w = img.shape
    head = b"P5\n" + b"".join(f"# {c}\n".encode() for c in comments) + b"%d %d\n255\n" % (w, h)
    Path(path).write_bytes(head + img.tobytes())


def read_pgm(path):
    """Return ``(image uint8 array, comments)`` of a P5 file with maxval 255."""
    data = Path(path).read_bytes()
    tokens, comments = [], []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise MalformedInput(f"{path}: truncated PGM header")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            end = len(data) if end < 0 else end
            comments.append(data[pos + 1 : end].decode("ascii", "replace").strip())
            pos = end
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != b"P5":
        raise MalformedInput(f"{path}: not a binary PGM (P5)")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise MalformedInput(f"{path}: only maxval 255 is supported")
    body = data[pos : pos + w * h]
    if len(body) != w * h:
        raise MalformedInput(f"{path}: truncated PGM data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w).copy(), comments


def read_mask(path) -> MaskInstance:
    _, inst, cls = parse_mask_filename(Path(path).name)
    img, comments = read_pgm(path)
    quality = 1.0
    for c in comments:
        key, _, val = c.partition(" ")
        if key == "quality":
            try:
                quality = float(val)
            except ValueError as exc:
                raise MalformedInput(f"{path}: bad quality comment") from exc
    return MaskInstance(inst, cls, img.astype(float) / 255.0, quality)


def read_frames_dir(directory):
    """Load all frames and masks from ``directory`` in frame-index order."""
    d = Path(directory)
    depth_files = sorted(p for p in d.iterdir() if DEPTH_RE.match(p.name))
    if not depth_files:
        raise MalformedInput(f"{d}: no frame*.depth files")
    poses = read_trajectory(d / "poses.txt")
    if len(poses) != len(depth_files):
        raise MalformedInput(f"{d}: {len(depth_files)} depth files but {len(poses)} poses")
    masks_by_frame: dict[int, list] = {}
    for p in sorted(d.glob("frame*_inst*_class*.pgm")):
        t, _, _ = parse_mask_filename(p.name)
        masks_by_frame.setdefault(t, []).append(read_mask(p))
    frames, masks = [], []
    for i, p in enumerate(depth_files):
        t = int(DEPTH_RE.match(p.name).group(1))
        depth, (fx, fy, cx, cy) = read_depth(p)
        conf_path = d / f"frame{t:05d}_conf.depth"
        conf = read_depth(conf_path)[0] if conf_path.exists() else None
        frames.append(
            DepthFrame(depth, fx, fy, cx, cy, poses.rotations[i], poses.positions[i], conf)
        )
        masks.append(masks_by_frame.get(t, []))
    return frames, masks
