"""Grid sequence writer (binary .atgrid) and long-format CSV export."""

import csv
import logging
import struct
from pathlib import Path

import numpy as np

from atloss.core.exceptions import DimensionError
from atloss.utils.files import atomic_write

logger = logging.getLogger(__name__)

GRID_MAGIC = b"ATGR"
GRID_VERSION = 1
# magic, version, height, width, steps
GRID_HEADER = struct.Struct("<4sHIII")


def export_grid_sequence(frames: np.ndarray, output_path: Path) -> None:
    """
    Writes a (steps, H, W) array: header, then row-major little-endian float32.

    Args:
        frames: Sequence of fields in mm/h.
        output_path: Target .atgrid file.
    """
    if frames.ndim != 3:
        raise DimensionError(f"expected (steps, H, W), got shape {frames.shape}")
    steps, height, width = frames.shape
    with atomic_write(output_path, "wb") as f:
        f.write(GRID_HEADER.pack(GRID_MAGIC, GRID_VERSION, height, width, steps))
        f.write(np.ascontiguousarray(frames, dtype="<f4").tobytes())

    logger.info(f"Grid sequence exported: {output_path} ({steps} x {height}x{width})")


def export_grid_csv(frames: np.ndarray, output_path: Path) -> None:
    """One row per cell: step,row,col,value."""
    if frames.ndim != 3:
        raise DimensionError(f"expected (steps, H, W), got shape {frames.shape}")
    with atomic_write(output_path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["step", "row", "col", "value"])
        for (t, r, c), value in np.ndenumerate(frames):
            writer.writerow([t, r, c, repr(float(value))])

    logger.info(f"Grid CSV exported: {output_path}")
