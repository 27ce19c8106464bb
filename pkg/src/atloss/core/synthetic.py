"""Synthetic precipitation sequences: advecting Gaussian rain cells.

Cells move with a constant velocity plus Gaussian jitter on a periodic
domain, their log-amplitudes random-walk with mean reversion, dry spells
scale whole fields below a ceiling, and sparse clutter spikes stand in for
the isolated spurious echoes of real radar composites.
"""

import logging

import numpy as np

from atloss.core.exceptions import InvalidInputError
from atloss.core.models import GridField
from atloss.core.params import StormParams
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)


def _periodic_offset(coord: np.ndarray, center: float, size: int) -> np.ndarray:
    return (coord - center + size / 2.0) % size - size / 2.0


def generate_frames(
    height: int, width: int, steps: int, storm_params: StormParams, seed: int
) -> np.ndarray:
    """
    Synthesizes a (steps, height, width) array of non-negative intensities (mm/h).

    Deterministic given seed.
    """
    if height <= 0 or width <= 0 or steps <= 0:
        raise InvalidInputError(
            f"dimensions and steps must be positive, got {height}x{width}x{steps}"
        )

    p = storm_params
    rng = derive_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)

    cx = rng.uniform(0.0, width, p.n_cells)
    cy = rng.uniform(0.0, height, p.n_cells)
    sigma = rng.uniform(p.sigma_min, p.sigma_max, p.n_cells)
    log_mean = np.log(p.amplitude_mean)
    log_amp = log_mean + p.amplitude_spread * rng.standard_normal(p.n_cells)

    frames = np.zeros((steps, height, width))
    dry_remaining = 0
    n = height * width

    for t in range(steps):
        field = frames[t]
        for c in range(p.n_cells):
            dx = _periodic_offset(xx, cx[c], width)
            dy = _periodic_offset(yy, cy[c], height)
            field += np.exp(log_amp[c]) * np.exp(-(dx * dx + dy * dy) / (2.0 * sigma[c] ** 2))

        if dry_remaining == 0 and rng.random() < p.dry_probability:
            dry_remaining = p.dry_spell_length
        if dry_remaining > 0:
            peak = field.max()
            if peak > p.dry_ceiling:
                field *= p.dry_ceiling / peak
            dry_remaining -= 1
        else:
            n_clutter = rng.binomial(n, p.clutter_fraction) if p.clutter_fraction > 0 else 0
            if n_clutter:
                flat = rng.choice(n, size=n_clutter, replace=False)
                field.flat[flat] += p.clutter_amplitude * rng.uniform(0.5, 1.0, n_clutter)

        cx = (cx + p.velocity_x + p.jitter * rng.standard_normal(p.n_cells)) % width
        cy = (cy + p.velocity_y + p.jitter * rng.standard_normal(p.n_cells)) % height
        log_amp = (
            log_amp
            + p.growth_std * rng.standard_normal(p.n_cells)
            - p.reversion * (log_amp - log_mean)
        )

    logger.debug(
        f"Synthesized {steps} frames of {height}x{width}, max {frames.max():.2f} mm/h"
    )
    return frames


def generate_synthetic_sequence(
    height: int, width: int, steps: int, storm_params: StormParams, seed: int
) -> list[GridField]:
    """Synthetic sequence as ordered GridFields."""
    return [GridField(frame) for frame in generate_frames(height, width, steps, storm_params, seed)]
