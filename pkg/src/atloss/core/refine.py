"""Tukey-fence outlier refinement of precipitation fields."""

import logging

import numpy as np
from scipy.ndimage import convolve

from atloss.config import DEFAULT_TUKEY_K
from atloss.core.exceptions import InvalidParameterError
from atloss.core.models import GridField

logger = logging.getLogger(__name__)

MAX_PASSES = 25

_NEIGHBORS = np.array([[1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0]])


def tukey_fences(values: np.ndarray, k: float = DEFAULT_TUKEY_K) -> tuple[float, float]:
    """(Q1 - k IQR, Q3 + k IQR) of the given sample."""
    q1, q3 = np.percentile(values, [25.0, 75.0])
    iqr = q3 - q1
    return float(q1 - k * iqr), float(q3 + k * iqr)


def find_outliers(
    values: np.ndarray,
    k: float = DEFAULT_TUKEY_K,
    wet_only: bool = False,
    min_value: float = 0.0,
) -> np.ndarray:
    """
    Boolean mask of cells strictly outside the Tukey fences.

    With wet_only, quartiles are taken over cells above min_value and only
    those cells can be flagged.
    """
    candidates = values > min_value if wet_only else np.ones(values.shape, dtype=bool)
    sample = values[candidates]
    if sample.size == 0 or np.all(sample == sample[0]):
        return np.zeros(values.shape, dtype=bool)
    low, high = tukey_fences(sample, k)
    return candidates & ((values < low) | (values > high))


def _neighbor_means(values: np.ndarray, valid: np.ndarray) -> np.ndarray:
    sums = convolve(np.where(valid, values, 0.0), _NEIGHBORS, mode="constant", cval=0.0)
    counts = convolve(valid.astype(np.float64), _NEIGHBORS, mode="constant", cval=0.0)
    fallback = float(values[valid].mean())
    return np.where(counts > 0, sums / np.maximum(counts, 1.0), fallback)


def tukey_refine_with_mask(
    field: GridField,
    k: float = DEFAULT_TUKEY_K,
    wet_only: bool = False,
    min_value: float = 0.0,
) -> tuple[GridField, np.ndarray]:
    """
    Replaces outliers by the mean of their valid 8-neighbors.

    Detection and replacement repeat until the field has no outliers under
    its own fences, so refining a refined field is a no-op. A cell with no
    valid neighbor takes the mean of all non-outlier cells.

    Returns:
        (refined field, mask of every cell that was replaced)
    """
    if not (np.isfinite(k) and k >= 0):
        raise InvalidParameterError(f"k must be >= 0, got {k}")

    values = field.values.copy()
    replaced = np.zeros(values.shape, dtype=bool)

    for pass_index in range(MAX_PASSES):
        outliers = find_outliers(values, k, wet_only, min_value)
        if not outliers.any():
            break
        valid = ~outliers
        if not valid.any():
            break
        values = np.where(outliers, _neighbor_means(values, valid), values)
        replaced |= outliers
        logger.debug(f"Tukey pass {pass_index + 1}: replaced {int(outliers.sum())} cells")
    else:
        logger.warning(f"Tukey refinement did not settle within {MAX_PASSES} passes")

    return GridField(values), replaced


def tukey_refine(
    field: GridField,
    k: float = DEFAULT_TUKEY_K,
    wet_only: bool = False,
    min_value: float = 0.0,
) -> GridField:
    """Refined copy of field; a field of identical values is returned unchanged."""
    refined, _ = tukey_refine_with_mask(field, k, wet_only, min_value)
    return refined


def refine_sequence(
    frames: np.ndarray,
    k: float = DEFAULT_TUKEY_K,
    wet_only: bool = False,
    min_value: float = 0.0,
) -> tuple[np.ndarray, int]:
    """Refines every frame of a (steps, H, W) array; returns frames and the replaced-cell count."""
    out = np.empty_like(frames, dtype=np.float64)
    total = 0
    for t, frame in enumerate(frames):
        refined, mask = tukey_refine_with_mask(GridField(frame), k, wet_only, min_value)
        out[t] = refined.values
        total += int(mask.sum())
    logger.info(f"Refined {frames.shape[0]} frames, replaced {total} cells")
    return out, total
