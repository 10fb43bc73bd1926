"""File formats used by the command-line tools."""

from .cloud import read_cloud, write_cloud
from .config import RunConfig, parse_config, read_config, serialize_config
from .frames import (
    mask_filename,
    parse_mask_filename,
    read_depth,
    read_frames_dir,
    read_pgm,
    write_depth,
    write_pgm,
)
from .raster import read_ascii_grid, write_ascii_grid
from .render import heatmap_pixels, render_heatmap
from .report import format_report, read_report, write_report
from .trajectory_io import read_trajectory, write_trajectory
from .zones import ZONES_HEADER, read_zones, write_zones

__all__ = [
    "RunConfig",
    "ZONES_HEADER",
    "format_report",
    "heatmap_pixels",
    "mask_filename",
    "parse_config",
    "parse_mask_filename",
    "read_ascii_grid",
    "read_cloud",
    "read_config",
    "read_depth",
    "read_frames_dir",
    "read_pgm",
    "read_report",
    "read_trajectory",
    "read_zones",
    "render_heatmap",
    "serialize_config",
    "write_ascii_grid",
    "write_cloud",
    "write_depth",
    "write_pgm",
    "write_report",
    "write_trajectory",
    "write_zones",
]
