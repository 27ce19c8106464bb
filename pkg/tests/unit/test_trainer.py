"""Tests for training, evaluation and the consistency experiment."""

import numpy as np
import pytest

from atloss.core.exceptions import ConfigError, InvalidInputError
from atloss.core.models import NormalizationSpec, WindowedDataset
from atloss.core.params import AnnealSchedule, AtLossParams, NoiseSpec, TrainConfig
from atloss.core.trainer import (
    check_track_pair,
    consistency_experiment,
    evaluate,
    split_pairs,
    train,
)
from atloss.core.windows import build_windows
from atloss.nn.model import CnnModel


@pytest.fixture
def small_dataset(rng) -> WindowedDataset:
    """12 frames of 6x6 advecting blobs: 7 windows."""
    yy, xx = np.mgrid[0:6, 0:6]
    frames = np.stack(
        [6.0 * np.exp(-((xx - (t % 6)) ** 2 + (yy - 3) ** 2) / 3.0) for t in range(12)]
    )
    return build_windows(frames + rng.uniform(0.0, 0.1, frames.shape))


def _config(**changes) -> TrainConfig:
    base = dict(epochs=2, batch_size=3, hidden_channels=4, seed=7)
    base.update(changes)
    return TrainConfig(**base)


def test_split_pairs_uses_step_five_and_six(small_dataset):
    inputs, targets = split_pairs(small_dataset)
    assert inputs.shape == (7, 1, 6, 6)
    np.testing.assert_array_equal(inputs[0, 0], small_dataset.frames[4])
    np.testing.assert_array_equal(targets[0, 0], small_dataset.frames[5])

    stacked, _ = split_pairs(small_dataset, stacked_input=True)
    assert stacked.shape == (7, 5, 6, 6)


def test_zero_epochs_returns_initialization(small_dataset):
    result = train(_config(epochs=0), small_dataset)
    fresh = CnnModel(hidden_channels=4, seed=7).parameters()
    for name, value in result.model.parameters().items():
        np.testing.assert_array_equal(value, fresh[name])
    assert result.log == []


@pytest.mark.parametrize("loss", ["at", "mse", "huber"])
def test_training_is_bit_reproducible(small_dataset, loss):
    a = train(_config(loss=loss), small_dataset)
    b = train(_config(loss=loss), small_dataset)
    for name, value in a.model.parameters().items():
        np.testing.assert_array_equal(value, b.model.parameters()[name])
    assert [r.train_loss for r in a.log] == [r.train_loss for r in b.log]


def test_epoch_log_fields(small_dataset):
    result = train(_config(epochs=3), small_dataset)
    assert [r.epoch for r in result.log] == [0, 1, 2]
    assert result.log[0].tau == 1.0
    assert result.log[1].tau < result.log[0].tau
    assert all(np.isfinite(r.train_loss) for r in result.log)

    baseline = train(_config(loss="mae", epochs=1), small_dataset)
    assert baseline.log[0].tau is None


def test_training_changes_parameters(small_dataset):
    result = train(_config(epochs=1), small_dataset)
    fresh = CnnModel(hidden_channels=4, seed=7).parameters()
    assert not np.array_equal(result.model.parameters()["conv2.weight"], fresh["conv2.weight"])


def test_empty_dataset_rejected():
    empty = WindowedDataset(frames=np.zeros((5, 3, 3)), norm=NormalizationSpec())
    with pytest.raises(InvalidInputError):
        train(_config(), empty)


def test_dirty_track_requires_noise():
    with pytest.raises(ConfigError):
        TrainConfig(track="dirty")
    with pytest.raises(ConfigError):
        TrainConfig(track="clean", noise=NoiseSpec())


def test_track_pair_mismatch_rejected():
    clean = _config()
    dirty = _config(track="dirty", noise=NoiseSpec(), lr=0.001)
    with pytest.raises(ConfigError):
        check_track_pair(clean, dirty)


def test_noise_free_dirty_track_matches_clean(small_dataset):
    clean = _config()
    dirty = _config(track="dirty", noise=NoiseSpec(fraction=0.0))
    result = consistency_experiment(clean, dirty, small_dataset)
    assert result.mae == 0.0
    assert result.psnr == 99.0


def test_noisy_dirty_track_diverges(small_dataset):
    clean = _config()
    dirty = _config(track="dirty", noise=NoiseSpec(fraction=0.3, seed=2))
    result = consistency_experiment(clean, dirty, small_dataset)
    assert result.mae > 0.0
    assert result.psnr < 99.0


def test_evaluate_rows(small_dataset):
    model = train(_config(epochs=1), small_dataset).model
    rows = evaluate(model, small_dataset, thresholds=(2.0, 0.5), lead_steps=(1, 3))
    assert [(r.threshold, r.lead_time) for r in rows] == [
        (2.0, 10.0),
        (0.5, 10.0),
        (2.0, 30.0),
        (0.5, 30.0),
    ]
    assert all(r.psnr <= 99.0 for r in rows)


def test_evaluate_rejects_bad_lead(small_dataset):
    model = CnnModel(hidden_channels=2)
    with pytest.raises(InvalidInputError):
        evaluate(model, small_dataset, lead_steps=(6,))


def test_at_loss_mostly_decreases_on_separable_data():
    """Wet and dry cells never move, so the threshold side is readable from the input."""
    pattern = np.zeros((8, 8))
    pattern[:, :4] = 4.0
    dataset = build_windows(np.repeat(pattern[None], 16, axis=0))
    config = _config(
        epochs=30,
        batch_size=len(dataset),
        at=AtLossParams(deterministic=True),
        schedule=AnnealSchedule(tau_start=1.0, tau_floor=1.0),
    )
    losses = [r.train_loss for r in train(config, dataset).log]
    decreases = sum(b < a for a, b in zip(losses, losses[1:]))
    assert decreases >= 0.8 * (len(losses) - 1)
    assert losses[-1] < losses[0]
