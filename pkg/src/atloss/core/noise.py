"""Impulse noise injection for the dirty training track."""

import numpy as np

from atloss.core.exceptions import InvalidParameterError
from atloss.core.models import GridField
from atloss.core.params import NoiseSpec
from atloss.utils.seeding import derive_rng


def inject_noise_with_mask(
    field: GridField,
    spec: NoiseSpec,
    physical_min: float = 0.0,
    physical_max: float | None = None,
    stream: tuple[int, ...] = (),
) -> tuple[GridField, np.ndarray]:
    """
    Corrupts exactly round(fraction * n) distinct cells.

    salt_and_pepper sets each chosen cell to physical_min or physical_max with
    equal probability; random_valued_impulse draws uniformly in between.
    physical_max defaults to the field maximum. stream extends spec.seed so a
    caller can draw a fresh pattern per epoch and sample.

    Returns:
        (noisy field, boolean mask of corrupted cells)
    """
    high = float(field.values.max()) if physical_max is None else float(physical_max)
    if physical_min < 0 or high < physical_min:
        raise InvalidParameterError(
            f"noise bounds must satisfy 0 <= min <= max, got [{physical_min}, {high}]"
        )

    values = field.values.copy()
    mask = np.zeros(values.shape, dtype=bool)
    count = int(round(spec.fraction * field.n))
    if count == 0:
        return GridField(values), mask

    rng = derive_rng(spec.seed, *stream)
    cells = rng.choice(field.n, size=count, replace=False)
    if spec.kind == "salt_and_pepper":
        impulses = np.where(rng.random(count) < 0.5, physical_min, high)
    else:
        impulses = rng.uniform(physical_min, high, count)

    values.flat[cells] = impulses
    mask.flat[cells] = True
    return GridField(values), mask


def inject_noise(
    field: GridField,
    spec: NoiseSpec,
    physical_min: float = 0.0,
    physical_max: float | None = None,
    stream: tuple[int, ...] = (),
) -> GridField:
    """Noisy copy of field; fraction 0 returns an identical copy."""
    noisy, _ = inject_noise_with_mask(field, spec, physical_min, physical_max, stream)
    return noisy
