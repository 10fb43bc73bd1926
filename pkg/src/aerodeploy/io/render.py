"""Red-to-green heatmaps as binary PPM (P6) images."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..exceptions import MalformedInput

NODATA_RGB = (128, 128, 128)


def heatmap_pixels(raster) -> np.ndarray:
    """``(h, w, 3)`` uint8 image; raster row 0 is the top image row.

    Red is ``floor(255 (1 - v) + 0.5)`` and green is ``255 - red``, so
    0 is pure red, 1 pure green and 0.5 gives ``(128, 127, 0)``.
    NaN cells are gray.
    """
    a = np.asarray(raster, dtype=float)
    if a.ndim != 2:
        raise MalformedInput("heatmap needs a 2-d raster")
    nodata = np.isnan(a)
    v = np.clip(np.where(nodata, 0.0, a), 0.0, 1.0)
    red = np.floor(255.0 * (1.0 - v) + 0.5).astype(np.int64)
    img = np.zeros(a.shape + (3,), dtype=np.uint8)
    img[..., 0] = red
    img[..., 1] = 255 - red
    img[nodata] = NODATA_RGB
    return img


def render_heatmap(raster, out_path) -> None:
    img = heatmap_pixels(raster)
    h, w = img.shape[:2]
    Path(out_path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + img.tobytes())
