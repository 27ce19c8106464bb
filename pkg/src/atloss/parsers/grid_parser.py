"""Grid sequence reader."""

import logging
from pathlib import Path

import numpy as np

from atloss.core.exceptions import InvalidInputError
from atloss.exporters.grid_exporter import GRID_HEADER, GRID_MAGIC, GRID_VERSION

logger = logging.getLogger(__name__)


def read_grid_sequence(path: Path) -> np.ndarray:
    """
    Reads an .atgrid file into a (steps, H, W) float64 array.

    Raises:
        InvalidInputError: Bad magic, unsupported version, truncated payload,
            or negative / non-finite values.
    """
    data = Path(path).read_bytes()
    if len(data) < GRID_HEADER.size:
        raise InvalidInputError(f"{path}: file too short for a grid header")
    magic, version, height, width, steps = GRID_HEADER.unpack_from(data)
    if magic != GRID_MAGIC:
        raise InvalidInputError(f"{path}: not a grid file (magic {magic!r})")
    if version != GRID_VERSION:
        raise InvalidInputError(f"{path}: unsupported grid version {version}")

    expected = steps * height * width * 4
    payload = data[GRID_HEADER.size :]
    if len(payload) != expected:
        raise InvalidInputError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}"
        )
    frames = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(steps, height, width)
    if not np.all(np.isfinite(frames)) or np.any(frames < 0):
        raise InvalidInputError(f"{path}: values must be finite and >= 0")

    logger.debug(f"Read {steps} frames of {height}x{width} from {path}")
    return frames
