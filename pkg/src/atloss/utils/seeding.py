"""Deterministic random streams.

Every stream is derived from integer keys (seed, step, index, ...) through
numpy's SeedSequence, so results never depend on call order across modules or
on thread count.
"""

import numpy as np


def derive_rng(*keys: int) -> np.random.Generator:
    """Independent generator for the given key tuple."""
    entropy = [int(k) % (1 << 64) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
