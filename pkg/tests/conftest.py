"""Pytest fixture configuration."""

from pathlib import Path

import numpy as np
import pytest

from atloss.core.models import GridField
from atloss.core.params import StormParams

# Small, fast experiment used by the CLI and trainer tests
TINY_CONFIG = """
[run]
seed = 0

[data]
height = 8
width = 8
steps = 14
eval_fraction = 0.5

[storm]
n_cells = 2
sigma_min = 1.5
sigma_max = 2.5
clutter_fraction = 0.01

[train]
epochs = 2
batch_size = 4
hidden_channels = 4
lead_steps = 1, 2

[gradcheck]
cases = 50

[lipschitz]
grid_points = 20001

[oracle]
k = 6

[consistency]
losses = at, mse
noise_kinds = random_valued_impulse
seeds = 0, 1
"""


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def spike_field() -> GridField:
    """5x5 zeros with a single 1000 mm/h spike in the center."""
    values = np.zeros((5, 5))
    values[2, 2] = 1000.0
    return GridField(values)


@pytest.fixture
def static_storm() -> StormParams:
    """One Gaussian cell that neither moves nor changes."""
    return StormParams(
        n_cells=1,
        amplitude_spread=0.0,
        velocity_x=0.0,
        velocity_y=0.0,
        jitter=0.0,
        growth_std=0.0,
        reversion=0.0,
        dry_probability=0.0,
        clutter_fraction=0.0,
    )


@pytest.fixture
def tiny_config(tmp_path: Path) -> Path:
    """Experiment file for quick end-to-end runs."""
    path = tmp_path / "tiny.ini"
    path.write_text(TINY_CONFIG, encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def isolated_output_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Default output directory inside the test's tmp dir."""
    out = tmp_path / "out"
    monkeypatch.setenv("ATLOSS_OUTPUT_DIR", str(out))
    return out
