"""Tests for the baseline losses."""

import numpy as np
import pytest

from atloss.core.baselines import baseline_loss
from atloss.core.exceptions import DimensionError, InvalidParameterError
from atloss.core.params import BaselineLossKind


@pytest.mark.parametrize("kind", ["mae", "mse", "huber", "charbonnier"])
def test_identical_fields(kind):
    """MAE, MSE and Huber vanish; Charbonnier bottoms out at epsilon."""
    x = np.full((3, 3), 2.0)
    result = baseline_loss(x, x.copy(), BaselineLossKind(kind=kind))
    expected = 1e-3 if kind == "charbonnier" else 0.0
    assert result.value == pytest.approx(expected)
    np.testing.assert_allclose(result.grad, 0.0)


def test_mse_single_cell():
    result = baseline_loss(np.array([[0.0]]), np.array([[2.0]]), BaselineLossKind(kind="mse"))
    assert result.value == 4.0
    assert result.grad[0, 0] == 4.0


def test_mae_single_cell():
    result = baseline_loss(np.array([[0.0]]), np.array([[2.0]]), BaselineLossKind(kind="mae"))
    assert result.value == 2.0
    assert result.grad[0, 0] == 1.0


def test_huber_branches():
    kind = BaselineLossKind(kind="huber", delta=1.0)
    quadratic = baseline_loss(np.array([[0.0]]), np.array([[0.5]]), kind)
    linear = baseline_loss(np.array([[0.0]]), np.array([[3.0]]), kind)
    assert quadratic.value == pytest.approx(0.125)
    assert quadratic.grad[0, 0] == pytest.approx(0.5)
    assert linear.value == pytest.approx(2.5)
    assert linear.grad[0, 0] == pytest.approx(1.0)


def test_mse_gradient_is_mean_reduced():
    x = np.zeros((2, 2))
    y = np.ones((2, 2))
    result = baseline_loss(x, y, BaselineLossKind(kind="mse"))
    np.testing.assert_allclose(result.grad, 0.5)


def test_invalid_constants_rejected():
    with pytest.raises(InvalidParameterError):
        BaselineLossKind(kind="huber", delta=0.0)
    with pytest.raises(InvalidParameterError):
        BaselineLossKind(kind="charbonnier", epsilon=-1.0)
    with pytest.raises(InvalidParameterError):
        BaselineLossKind(kind="l1")


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        baseline_loss(np.zeros((2, 2)), np.zeros(4), BaselineLossKind())


def test_charbonnier_approaches_mae(rng):
    x = rng.uniform(0.0, 10.0, (6, 6))
    d = rng.uniform(0.1, 3.0, (6, 6)) * np.where(rng.random((6, 6)) < 0.5, -1.0, 1.0)
    y = x + d
    charbonnier = baseline_loss(x, y, BaselineLossKind(kind="charbonnier", epsilon=1e-8))
    mae = baseline_loss(x, y, BaselineLossKind(kind="mae"))
    assert abs(charbonnier.value - mae.value) <= 1e-7
    np.testing.assert_allclose(charbonnier.grad, mae.grad, atol=1e-7)
