"""ESRI ASCII grids.

In memory, row 0 is the southern-most row (it starts at ``yllcorner``);
on disk the northern-most row comes first.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..bev import NODATA, GridSpec
from ..exceptions import MalformedInput

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


def _fmt_float(v: float) -> str:
    return "%.6g" % v


def format_ascii_grid(raster, spec: GridSpec, integer: bool = False, inf_value=None) -> str:
    """Serialize ``raster``; NaN (or ``NODATA`` for integers) becomes -9999.

    ``inf_value`` replaces ``+inf`` (used for the no-obstacle clearance).
    """
    a = np.asarray(raster)
    if a.shape != spec.shape:
        raise MalformedInput(f"raster shape {a.shape} does not match grid {spec.shape}")
    lines = [
        f"ncols         {spec.ncols}",
        f"nrows         {spec.nrows}",
        f"xllcorner     {spec.origin_x!r}",
        f"yllcorner     {spec.origin_y!r}",
        f"cellsize      {spec.resolution!r}",
        f"NODATA_value  {NODATA}",
    ]
    for row in a[::-1]:
        if integer:
            vals = [str(NODATA) if (v == NODATA) else str(int(v)) for v in row]
        else:
            vals = []
            for v in row:
                if np.isnan(v):
                    vals.append(str(NODATA))
                elif np.isinf(v):
                    if inf_value is None or v < 0:
                        raise MalformedInput("infinite raster value without a sentinel")
                    vals.append(_fmt_float(inf_value))
                else:
                    vals.append(_fmt_float(v))
        lines.append(" ".join(vals))
    return "\n".join(lines) + "\n"


def write_ascii_grid(path, raster, spec: GridSpec, integer: bool = False, inf_value=None) -> None:
    Path(path).write_text(format_ascii_grid(raster, spec, integer, inf_value))


def read_ascii_grid(path):
    """Return ``(spec, raster)`` with no-data cells as NaN and row 0 southern-most.

    ``xllcenter``/``yllcenter`` headers are accepted and converted to corners.
    """
    text = Path(path).read_text().split("\n")
    header: dict[str, float] = {}
    i = 0
    while i < len(text):
        parts = text[i].split()
        if not parts:
            i += 1
            continue
        key = parts[0].lower()
        if key in HEADER_KEYS or key in ("xllcenter", "yllcenter"):
            if len(parts) != 2:
                raise MalformedInput(f"{path}: bad header line {text[i]!r}")
            header[key] = float(parts[1])
            i += 1
        else:
            break
    try:
        ncols, nrows, res = int(header["ncols"]), int(header["nrows"]), header["cellsize"]
    except KeyError as exc:
        raise MalformedInput(f"{path}: missing header field {exc}") from exc
    if "xllcorner" in header:
        ox = header["xllcorner"]
    elif "xllcenter" in header:
        ox = header["xllcenter"] - res / 2
    else:
        raise MalformedInput(f"{path}: missing xllcorner")
    if "yllcorner" in header:
        oy = header["yllcorner"]
    elif "yllcenter" in header:
        oy = header["yllcenter"] - res / 2
    else:
        raise MalformedInput(f"{path}: missing yllcorner")
    nodata = header.get("nodata_value", NODATA)
    try:
        values = np.array(" ".join(text[i:]).split(), dtype=float)
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc
    if values.size != ncols * nrows:
        raise MalformedInput(f"{path}: expected {ncols * nrows} values, found {values.size}")
    grid = values.reshape(nrows, ncols)[::-1].copy()
    grid[grid == nodata] = np.nan
    return GridSpec(ox, oy, res, ncols, nrows), grid
