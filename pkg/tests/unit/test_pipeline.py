"""Tests for the data pipeline: synthesis, refinement, noise and windows."""

import numpy as np
import pytest

from atloss.config import DEFAULT_THRESHOLD
from atloss.core.exceptions import DimensionError, InvalidInputError, InvalidParameterError
from atloss.core.experiment import DataSection
from atloss.core.models import GridField, NormalizationSpec
from atloss.core.noise import inject_noise, inject_noise_with_mask
from atloss.core.params import NoiseSpec, StormParams
from atloss.core.refine import find_outliers, refine_sequence, tukey_refine, tukey_refine_with_mask
from atloss.core.synthetic import generate_frames, generate_synthetic_sequence
from atloss.core.windows import (
    build_windows,
    denormalize,
    fit_normalization,
    normalize,
    split_sequence,
)


# --- synthesis ---


def test_static_cell_is_constant(static_storm):
    frames = generate_frames(16, 16, 4, static_storm, seed=3)
    for frame in frames[1:]:
        np.testing.assert_array_equal(frame, frames[0])
    assert frames[0].max() > 0


def test_zero_cells_give_dry_fields():
    storm = StormParams(n_cells=0, clutter_fraction=0.0)
    frames = generate_frames(8, 8, 3, storm, seed=0)
    assert np.all(frames == 0.0)


def test_generation_is_deterministic():
    storm = StormParams()
    a = generate_frames(12, 10, 5, storm, seed=42)
    b = generate_frames(12, 10, 5, storm, seed=42)
    c = generate_frames(12, 10, 5, storm, seed=43)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert a.shape == (5, 12, 10)
    assert np.all(a >= 0)


def test_dry_spell_respects_ceiling():
    storm = StormParams(dry_probability=1.0, dry_spell_length=3, dry_ceiling=0.5)
    frames = generate_frames(16, 16, 3, storm, seed=1)
    assert frames.max() <= 0.5 + 1e-12


def test_dry_spells_give_dry_fields():
    storm = StormParams(dry_probability=0.05)
    frames = generate_frames(16, 16, 300, storm, seed=0)
    peaks = frames.max(axis=(1, 2))
    assert np.any(peaks < DEFAULT_THRESHOLD)
    assert np.any(peaks >= DEFAULT_THRESHOLD)


def test_sequence_as_fields(static_storm):
    fields = generate_synthetic_sequence(6, 7, 2, static_storm, seed=0)
    assert len(fields) == 2
    assert fields[0].shape == (6, 7)


def test_generation_rejects_bad_dimensions():
    with pytest.raises(InvalidInputError):
        generate_frames(0, 8, 3, StormParams(), seed=0)


# --- refinement ---


def test_spike_replaced_by_neighbors(spike_field):
    refined = tukey_refine(spike_field)
    assert refined.values[2, 2] == 0.0
    assert np.all(refined.values == 0.0)


def test_constant_field_unchanged():
    field = GridField(np.full((4, 4), 3.0))
    refined, mask = tukey_refine_with_mask(field)
    np.testing.assert_array_equal(refined.values, field.values)
    assert not mask.any()


def test_refinement_is_idempotent(rng):
    values = rng.gamma(2.0, 1.0, (12, 12))
    values[3, 4] = 200.0
    values[8, 9] = 150.0
    once = tukey_refine(GridField(values))
    twice = tukey_refine(once)
    np.testing.assert_array_equal(once.values, twice.values)
    assert not find_outliers(once.values).any()


def test_refinement_stays_within_original_range(rng):
    values = rng.uniform(0.0, 5.0, (10, 10))
    values[5, 5] = 500.0
    refined = tukey_refine(GridField(values))
    assert refined.values.max() <= 5.0
    assert refined.values.min() >= values.min()


def test_wet_only_uses_wet_quartiles():
    values = np.zeros((10, 10))
    values[1:5, 1:5] = np.linspace(3.0, 6.0, 16).reshape(4, 4)
    values[3, 3] = 300.0
    mask = find_outliers(values, wet_only=True)
    assert mask[3, 3]
    assert mask.sum() == 1
    # zeros dominate the full-grid quartiles, so every wet cell would be flagged
    assert find_outliers(values).sum() > 1


def test_default_refinement_removes_only_clutter(static_storm):
    """A static cell is identical with and without clutter, so the spikes are known exactly."""
    d = DataSection()
    clean = generate_frames(32, 32, 12, static_storm, seed=3)
    dirty = generate_frames(32, 32, 12, static_storm.replace(clutter_fraction=0.005), seed=3)
    spikes = dirty != clean
    assert spikes.any()

    for frame, frame_spikes in zip(dirty, spikes):
        _, mask = tukey_refine_with_mask(
            GridField(frame), d.refine_k, d.refine_wet_only, d.refine_min_value
        )
        np.testing.assert_array_equal(mask, frame_spikes)
    _, replaced = refine_sequence(dirty, d.refine_k, d.refine_wet_only, d.refine_min_value)
    assert replaced == int(spikes.sum())


def test_refine_rejects_negative_k(spike_field):
    with pytest.raises(InvalidParameterError):
        tukey_refine(spike_field, k=-1.0)


# --- noise ---


def test_noise_fraction_zero_is_identity(rng):
    field = GridField(rng.uniform(0.0, 10.0, (8, 8)))
    noisy = inject_noise(field, NoiseSpec(fraction=0.0))
    np.testing.assert_array_equal(noisy.values, field.values)


def test_salt_and_pepper_counts():
    field = GridField(np.full((10, 10), 5.0))
    spec = NoiseSpec(kind="salt_and_pepper", fraction=0.2, seed=3)
    noisy, mask = inject_noise_with_mask(field, spec, physical_min=0.0, physical_max=10.0)
    assert mask.sum() == 20
    assert set(np.unique(noisy.values[mask])) <= {0.0, 10.0}
    np.testing.assert_array_equal(noisy.values[~mask], 5.0)


def test_random_valued_impulse_within_bounds():
    field = GridField(np.full((10, 10), 5.0))
    spec = NoiseSpec(kind="random_valued_impulse", fraction=0.3, seed=9)
    noisy, mask = inject_noise_with_mask(field, spec, physical_min=1.0, physical_max=4.0)
    assert mask.sum() == 30
    assert np.all((noisy.values[mask] >= 1.0) & (noisy.values[mask] <= 4.0))


def test_noise_reproducible_per_stream():
    field = GridField(np.full((8, 8), 1.0))
    spec = NoiseSpec(fraction=0.25, seed=1)
    a = inject_noise(field, spec, physical_max=10.0, stream=(0, 1))
    b = inject_noise(field, spec, physical_max=10.0, stream=(0, 1))
    c = inject_noise(field, spec, physical_max=10.0, stream=(1, 1))
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_noise_fraction_out_of_bounds():
    with pytest.raises(InvalidParameterError):
        NoiseSpec(fraction=0.5)
    with pytest.raises(InvalidParameterError):
        NoiseSpec(fraction=0.05)


# --- windows ---


def test_window_count():
    frames = np.zeros((10, 4, 4))
    dataset = build_windows(frames)
    assert len(dataset) == 5
    assert dataset.windows.shape == (5, 6, 4, 4)


def test_windows_are_consecutive():
    frames = np.arange(8, dtype=float)[:, None, None] * np.ones((8, 2, 2))
    dataset = build_windows(frames)
    np.testing.assert_array_equal(dataset.windows[2, :, 0, 0], [2, 3, 4, 5, 6, 7])
    assert [f.values[0, 0] for f in dataset.window_fields(0)] == [0, 1, 2, 3, 4, 5]


def test_short_sequence_rejected():
    with pytest.raises(InvalidInputError):
        build_windows(np.zeros((5, 3, 3)))


def test_mismatched_frames_rejected():
    with pytest.raises(DimensionError):
        build_windows([GridField.zeros(3, 3)] * 5 + [GridField.zeros(3, 4)])


def test_normalize_maps_range():
    norm = NormalizationSpec(0.0, 50.0)
    np.testing.assert_allclose(normalize(np.array([0.0, 25.0, 50.0]), norm), [-1.0, 0.0, 1.0])


def test_normalize_round_trip(rng):
    norm = NormalizationSpec(0.0, 37.5)
    values = rng.uniform(0.0, 37.5, (5, 5))
    np.testing.assert_allclose(denormalize(normalize(values, norm), norm), values, atol=1e-12)


def test_all_zero_sequence_normalization():
    norm = fit_normalization(np.zeros((6, 2, 2)))
    assert norm.physical_max == 1.0
    with pytest.raises(InvalidParameterError):
        NormalizationSpec(1.0, 1.0)


def test_split_shares_normalization(rng):
    frames = rng.uniform(0.0, 10.0, (20, 3, 3))
    train_set, eval_set = split_sequence(frames, eval_fraction=0.4)
    assert eval_set is not None
    assert train_set.norm == eval_set.norm
    assert len(train_set) == 7
    assert len(eval_set) == 3


def test_split_without_room_for_eval():
    train_set, eval_set = split_sequence(np.ones((8, 2, 2)), eval_fraction=0.2)
    assert eval_set is None
    assert len(train_set) == 3
