"""Sliding windows over a field sequence and [-1, 1] normalization."""

import logging
from typing import Sequence

import numpy as np

from atloss.config import DEFAULT_DT_MINUTES, WINDOW_LENGTH
from atloss.core.exceptions import DimensionError, InvalidInputError
from atloss.core.loss import ArrayOrField, as_array
from atloss.core.models import GridField, NormalizationSpec, WindowedDataset

logger = logging.getLogger(__name__)


def stack_frames(sequence: Sequence[GridField] | np.ndarray) -> np.ndarray:
    """(steps, H, W) float64 array from GridFields or an existing array."""
    if isinstance(sequence, np.ndarray):
        frames = np.asarray(sequence, dtype=np.float64)
        if frames.ndim != 3:
            raise DimensionError(f"expected (steps, H, W), got shape {frames.shape}")
        if not np.all(np.isfinite(frames)) or np.any(frames < 0):
            raise InvalidInputError("frames must be finite and >= 0")
        return frames
    if not sequence:
        raise InvalidInputError("empty sequence")
    shape = sequence[0].shape
    for i, f in enumerate(sequence):
        if f.shape != shape:
            raise DimensionError(f"frame {i} has shape {f.shape}, expected {shape}")
    return np.stack([f.values for f in sequence])


def fit_normalization(frames: np.ndarray, physical_max: float | None = None) -> NormalizationSpec:
    """[0, max] range of the data, or [0, physical_max] when given; an all-zero sequence maps to [0, 1]."""
    if physical_max is not None:
        return NormalizationSpec(0.0, float(physical_max))
    peak = float(frames.max()) if frames.size else 0.0
    return NormalizationSpec(0.0, peak if peak > 0 else 1.0)


def build_windows(
    sequence: Sequence[GridField] | np.ndarray,
    window: int = WINDOW_LENGTH,
    dt_minutes: float = DEFAULT_DT_MINUTES,
    physical_max: float | None = None,
    norm: NormalizationSpec | None = None,
) -> WindowedDataset:
    """
    Overlapping windows of consecutive steps with stride 1.

    Args:
        sequence: Ordered fields at a fixed time step.
        window: Steps per window; the last one is the forecast target.
        dt_minutes: Time step between frames.
        physical_max: Optional fixed upper normalization bound.
        norm: Explicit normalization, e.g. shared between train and eval splits.

    Returns:
        Dataset with len(sequence) - window + 1 windows.
    """
    frames = stack_frames(sequence)
    if window < 2:
        raise InvalidInputError(f"window must be >= 2, got {window}")
    if frames.shape[0] < window:
        raise InvalidInputError(
            f"sequence of {frames.shape[0]} steps is shorter than the window ({window})"
        )
    dataset = WindowedDataset(
        frames=frames,
        norm=norm or fit_normalization(frames, physical_max),
        dt_minutes=dt_minutes,
        window=window,
    )
    logger.debug(f"Built {len(dataset)} windows from {frames.shape[0]} frames")
    return dataset


def normalize(values: ArrayOrField, norm: NormalizationSpec) -> np.ndarray:
    """Physical values mapped affinely so [physical_min, physical_max] becomes [-1, 1]."""
    arr = as_array(values)
    return 2.0 * (arr - norm.physical_min) / norm.span - 1.0


def denormalize(values: np.ndarray, norm: NormalizationSpec) -> np.ndarray:
    """Inverse of normalize; outputs outside [-1, 1] map outside the physical range."""
    arr = np.asarray(values, dtype=np.float64)
    return (arr + 1.0) * 0.5 * norm.span + norm.physical_min


def split_sequence(
    frames: np.ndarray,
    eval_fraction: float,
    window: int = WINDOW_LENGTH,
    dt_minutes: float = DEFAULT_DT_MINUTES,
    physical_max: float | None = None,
) -> tuple[WindowedDataset, WindowedDataset | None]:
    """
    Temporal split into train and eval datasets sharing one normalization.

    The eval split takes the trailing frames and is None when too short to
    hold a window.
    """
    norm = fit_normalization(frames, physical_max)
    steps = frames.shape[0]
    n_eval = int(round(steps * eval_fraction))
    if n_eval < window:
        return build_windows(frames, window, dt_minutes, norm=norm), None
    cut = steps - n_eval
    train = build_windows(frames[:cut], window, dt_minutes, norm=norm)
    evaluation = build_windows(frames[cut:], window, dt_minutes, norm=norm)
    return train, evaluation
