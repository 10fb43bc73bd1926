"""``zones.csv``: ranked deployment zones."""

from __future__ import annotations

import csv
from pathlib import Path

ZONES_HEADER = ["rank", "row", "col", "x", "y", "T", "goal_distance", "objective", "reachable"]


def _g(v: float) -> str:
    return "%.6g" % v


def write_zones(path, zones) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ZONES_HEADER)
        for rank, z in enumerate(zones, 1):
            w.writerow(
                [rank, z.row, z.col, _g(z.x), _g(z.y), _g(z.score_T), _g(z.goal_distance),
                 _g(z.objective), "true" if z.reachable else "false"]
            )


def read_zones(path) -> list[dict]:
    with open(Path(path), newline="") as fh:
        return list(csv.DictReader(fh))
