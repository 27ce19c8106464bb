"""Finite-difference checks of every analytic gradient in the package."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from atloss.config import PERTURBATION_CLAMP
from atloss.core.baselines import baseline_loss
from atloss.core.loss import at_loss, at_loss_cells, sample_logistic
from atloss.core.params import AtLossParams, BaselineLossKind
from atloss.nn.layers import Conv2d, InstanceNorm2d, Layer, Swish
from atloss.nn.model import CnnModel
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-3


@dataclass
class GradCase:
    """Worst relative error of one checked quantity."""

    suite: str
    case: int
    name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def to_record(self) -> dict:
        return {
            "suite": self.suite,
            "case": self.case,
            "name": self.name,
            "max_rel_error": self.max_rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def relative_error(
    analytic: np.ndarray | float, numeric: np.ndarray | float, floor: float = RELATIVE_FLOOR
) -> np.ndarray:
    """|a - f| / max(|a|, |f|, floor); absolute error once both are below the floor."""
    a = np.asarray(analytic, dtype=np.float64)
    f = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - f) / np.maximum(np.maximum(np.abs(a), np.abs(f)), floor)


def check_at_loss_cells(
    cases: int = 1000,
    step: float = 1e-5,
    tolerance: float = 1e-6,
    floor: float = RELATIVE_FLOOR,
    seed: int = 0,
) -> list[GradCase]:
    """
    Random (x, y, tau, theta, z) cases; the central-difference step is scaled by tau.

    Half the forecasts sit within a few tau of theta, where the sigmoid is
    steep; the rest are spread over the saturated tails.
    """
    rng = derive_rng(seed, 101)
    theta = rng.uniform(0.1, 5.0, cases)
    tau = rng.uniform(0.05, 1.0, cases)
    x = rng.uniform(0.0, 10.0, cases)
    near = theta + tau * rng.uniform(-3.0, 3.0, cases)
    wide = np.maximum(theta + rng.uniform(-5.0, 5.0, cases), 0.0)
    y = np.where(np.arange(cases) % 2 == 0, near, wide)
    z = np.clip(0.1 * np.asarray(sample_logistic(rng, cases)), -PERTURBATION_CLAMP, PERTURBATION_CLAMP)

    results = []
    for i in range(cases):
        params = AtLossParams(tau=float(tau[i]), theta=float(theta[i]))
        h = step * params.tau
        xi = np.array([x[i]])
        _, grad = at_loss_cells(xi, np.array([y[i]]), params, z[i])
        plus, _ = at_loss_cells(xi, np.array([y[i] + h]), params, z[i])
        minus, _ = at_loss_cells(xi, np.array([y[i] - h]), params, z[i])
        numeric = (plus - minus) / (2.0 * h)
        err = float(relative_error(grad, numeric, floor).max())
        results.append(GradCase("at_loss", i, "dL/dy", err, tolerance))
    return results


def _scalar_fd(
    fn: Callable[[np.ndarray], float], values: np.ndarray, step: float
) -> np.ndarray:
    """Central differences of fn with respect to every entry of values (modified in place, restored)."""
    numeric = np.zeros_like(values)
    for idx in np.ndindex(values.shape):
        original = values[idx]
        values[idx] = original + step
        plus = fn(values)
        values[idx] = original - step
        minus = fn(values)
        values[idx] = original
        numeric[idx] = (plus - minus) / (2.0 * step)
    return numeric


def check_at_loss_field(
    step: float = 1e-5, tolerance: float = 1e-6, floor: float = RELATIVE_FLOOR, seed: int = 0
) -> list[GradCase]:
    """Mean-reduced AT loss on a 4x4 field, fixed perturbation."""
    rng = derive_rng(seed, 102)
    params = AtLossParams(tau=0.5, theta=2.0, seed=seed)
    x = rng.uniform(0.0, 5.0, (4, 4))
    y = 2.0 + rng.uniform(-1.0, 1.0, (4, 4))
    z = np.clip(0.1 * np.asarray(sample_logistic(rng, (4, 4))), -0.5, 0.5)
    analytic = at_loss(x, y, params, z=z).grad
    numeric = _scalar_fd(lambda v: at_loss(x, v, params, z=z).value, y.copy(), step * params.tau)
    return [
        GradCase("at_loss", 0, "field_mean", float(relative_error(analytic, numeric, floor).max()), tolerance)
    ]


def check_baselines(
    step: float = 1e-5, tolerance: float = 1e-6, floor: float = RELATIVE_FLOOR, seed: int = 0
) -> list[GradCase]:
    """Every baseline on a 4x4 field whose residuals avoid the kinks."""
    rng = derive_rng(seed, 103)
    x = rng.uniform(0.0, 5.0, (4, 4))
    d = rng.uniform(0.05, 3.0, (4, 4)) * np.where(rng.random((4, 4)) < 0.5, -1.0, 1.0)
    # keep huber residuals away from |d| == delta
    d = np.where(np.abs(np.abs(d) - 1.0) < 0.05, d * 1.2, d)
    y = x + d
    results = []
    for i, name in enumerate(("mae", "mse", "huber", "charbonnier")):
        kind = BaselineLossKind(kind=name)
        analytic = baseline_loss(x, y, kind).grad
        numeric = _scalar_fd(lambda v, k=kind: baseline_loss(x, v, k).value, y.copy(), step)
        err = float(relative_error(analytic, numeric, floor).max())
        results.append(GradCase("baseline", i, name, err, tolerance))
    return results


def _layer_case(
    layer: Layer, x: np.ndarray, weights: np.ndarray, step: float, floor: float
) -> dict[str, float]:
    """Worst error for the input and each parameter of layer under S = sum(out * weights)."""
    def scalar(_: np.ndarray) -> float:
        return float(np.sum(layer.forward(x) * weights))

    layer.forward(x)
    layer.zero_grad()
    input_grad = layer.backward(weights)
    analytic = {name: g.copy() for name, g in layer.grads.items()}
    errors = {"input": float(relative_error(input_grad, _scalar_fd(scalar, x, step), floor).max())}
    for name, value in layer.params.items():
        errors[name] = float(relative_error(analytic[name], _scalar_fd(scalar, value, step), floor).max())
    return errors


def check_layers(
    step: float = 1e-4, tolerance: float = 1e-4, floor: float = RELATIVE_FLOOR, seed: int = 0
) -> list[GradCase]:
    """Conv2d, InstanceNorm2d, Swish, and the full model on 2x1x8x8 inputs."""
    rng = derive_rng(seed, 104)
    results = []
    cases: list[tuple[str, Layer, tuple[int, ...]]] = [
        ("conv2d", Conv2d(1, 3, rng=rng), (2, 1, 8, 8)),
        ("instance_norm", InstanceNorm2d(3), (2, 3, 8, 8)),
        ("swish", Swish(), (2, 1, 8, 8)),
    ]
    norm_layer = cases[1][1]
    norm_layer.params["gamma"][...] = rng.uniform(0.5, 1.5, 3)
    norm_layer.params["beta"][...] = rng.uniform(-0.5, 0.5, 3)
    for case, (label, layer, shape) in enumerate(cases):
        x = rng.standard_normal(shape)
        out_shape = layer.forward(x).shape
        weights = rng.standard_normal(out_shape)
        for name, err in _layer_case(layer, x, weights, step, floor).items():
            results.append(GradCase("layers", case, f"{label}.{name}", err, tolerance))

    model = CnnModel(in_channels=1, hidden_channels=4, seed=seed)
    x = rng.standard_normal((2, 1, 8, 8))
    weights = rng.standard_normal((2, 1, 8, 8))

    def scalar(_: np.ndarray) -> float:
        return float(np.sum(model.forward(x) * weights))

    model.forward(x)
    analytic = {k: v.copy() for k, v in model.backward(weights).items()}
    input_grad = model.input_grad
    case = len(cases)
    err = float(relative_error(input_grad, _scalar_fd(scalar, x, step), floor).max())
    results.append(GradCase("layers", case, "model.input", err, tolerance))
    for name, value in model.parameters().items():
        err = float(relative_error(analytic[name], _scalar_fd(scalar, value, step), floor).max())
        results.append(GradCase("layers", case, f"model.{name}", err, tolerance))
    return results


def run_gradcheck(
    cases: int = 1000,
    step: float = 1e-5,
    tolerance: float = 1e-6,
    layer_step: float = 1e-4,
    layer_tolerance: float = 1e-4,
    floor: float = RELATIVE_FLOOR,
    seed: int = 0,
) -> list[GradCase]:
    """All suites, AT loss first."""
    results = check_at_loss_cells(cases, step, tolerance, floor, seed)
    results += check_at_loss_field(step, tolerance, floor, seed)
    results += check_baselines(step, tolerance, floor, seed)
    results += check_layers(layer_step, layer_tolerance, floor, seed)
    failed = [c for c in results if not c.passed]
    logger.info(f"Gradient check: {len(results) - len(failed)}/{len(results)} cases passed")
    return results
