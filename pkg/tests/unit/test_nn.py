"""Tests for the numpy layers, model and optimizer."""

import numpy as np
import pytest

from atloss.core.exceptions import DimensionError, MissingCacheError
from atloss.core.gradcheck import check_layers
from atloss.nn.layers import Conv2d, InstanceNorm2d, Swish
from atloss.nn.model import CnnModel
from atloss.nn.optim import Adam


def _naive_conv(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, padding: int) -> np.ndarray:
    batch, in_ch, height, width = x.shape
    out_ch, _, k, _ = weight.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    out_h = height + 2 * padding - k + 1
    out_w = width + 2 * padding - k + 1
    out = np.zeros((batch, out_ch, out_h, out_w))
    for b in range(batch):
        for o in range(out_ch):
            for i in range(out_h):
                for j in range(out_w):
                    total = bias[o]
                    for c in range(in_ch):
                        for u in range(k):
                            for v in range(k):
                                total += xp[b, c, i + u, j + v] * weight[o, c, u, v]
                    out[b, o, i, j] = total
    return out


def test_conv_matches_direct_convolution(rng):
    conv = Conv2d(2, 3, rng=rng)
    x = rng.standard_normal((2, 2, 5, 6))
    expected = _naive_conv(x, conv.params["weight"], conv.params["bias"], 1)
    np.testing.assert_allclose(conv.forward(x), expected, atol=1e-6)


def test_conv_zero_weights_zero_output(rng):
    conv = Conv2d(1, 4, rng=rng)
    conv.params["weight"][...] = 0.0
    conv.params["bias"][...] = 0.0
    assert np.all(conv.forward(rng.standard_normal((1, 1, 6, 6))) == 0.0)


def test_conv_rejects_wrong_channels(rng):
    with pytest.raises(DimensionError):
        Conv2d(1, 2, rng=rng).forward(np.zeros((1, 3, 4, 4)))


def test_backward_before_forward():
    with pytest.raises(MissingCacheError):
        Conv2d(1, 1).backward(np.zeros((1, 1, 3, 3)))
    with pytest.raises(MissingCacheError):
        CnnModel().backward(np.zeros((1, 1, 3, 3)))


def test_identity_kernel_reproduces_input(rng):
    model = CnnModel(hidden_channels=1, use_norm=False, use_activation=False)
    for name in ("conv1", "conv2"):
        layer = model.layers[name]
        layer.params["weight"][...] = 0.0
        layer.params["weight"][0, 0, 1, 1] = 1.0
        layer.params["bias"][...] = 0.0
    x = rng.standard_normal((2, 1, 7, 5))
    np.testing.assert_allclose(model.forward(x), x)


def test_output_shape_matches_input(rng):
    model = CnnModel(seed=3)
    for shape in [(1, 1, 4, 4), (3, 1, 9, 13)]:
        assert model.forward(rng.standard_normal(shape)).shape == shape


def test_stacked_input_model(rng):
    model = CnnModel(in_channels=5, hidden_channels=4)
    assert model.forward(rng.standard_normal((2, 5, 6, 6))).shape == (2, 1, 6, 6)


def test_instance_norm_statistics(rng):
    norm = InstanceNorm2d(3)
    out = norm.forward(rng.standard_normal((2, 3, 8, 8)) * 4.0 + 7.0)
    np.testing.assert_allclose(out.mean(axis=(2, 3)), 0.0, atol=1e-5)
    np.testing.assert_allclose(out.var(axis=(2, 3)), 1.0, atol=1e-5)


def test_swish_gradient_at_zero():
    swish = Swish()
    swish.forward(np.zeros((1, 1, 1, 1)))
    assert swish.backward(np.ones((1, 1, 1, 1)))[0, 0, 0, 0] == pytest.approx(0.5)


def test_zero_upstream_gives_zero_gradients(rng):
    model = CnnModel(hidden_channels=4)
    model.forward(rng.standard_normal((2, 1, 6, 6)))
    grads = model.backward(np.zeros((2, 1, 6, 6)))
    for value in grads.values():
        assert np.all(value == 0.0)


def test_parameter_only_backward_matches_full(rng):
    model = CnnModel(hidden_channels=4, seed=2)
    x = rng.standard_normal((3, 1, 6, 7))
    upstream = rng.standard_normal((3, 1, 6, 7))
    model.forward(x)
    full = {k: v.copy() for k, v in model.backward(upstream).items()}
    assert model.input_grad is not None

    model.forward(x)
    partial = model.backward(upstream, input_grad=False)
    assert model.input_grad is None
    for name, value in full.items():
        np.testing.assert_array_equal(partial[name], value)


def test_layer_gradients_match_finite_differences():
    for case in check_layers(seed=5):
        assert case.passed, f"{case.name}: {case.max_rel_error:.3e}"


def test_model_initialization_is_seeded():
    a = CnnModel(seed=1).parameters()
    b = CnnModel(seed=1).parameters()
    c = CnnModel(seed=2).parameters()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])
    assert not np.array_equal(a["conv1.weight"], c["conv1.weight"])


def test_load_parameters_checks_names():
    model = CnnModel(hidden_channels=2)
    with pytest.raises(DimensionError):
        model.load_parameters({"conv1.weight": np.zeros((2, 1, 3, 3))})


def test_adam_zero_gradient_keeps_parameters():
    params = {"w": np.array([1.0, -2.0])}
    optimizer = Adam(params)
    optimizer.step({"w": np.zeros(2)})
    np.testing.assert_array_equal(params["w"], [1.0, -2.0])
    assert optimizer.t == 1


def test_adam_first_step_moves_by_lr():
    """Bias correction makes the first step lr * sign(g)."""
    params = {"w": np.array([0.0, 0.0])}
    optimizer = Adam(params, lr=0.01)
    optimizer.step({"w": np.array([3.0, -0.5])})
    np.testing.assert_allclose(params["w"], [-0.01, 0.01], rtol=1e-6)
