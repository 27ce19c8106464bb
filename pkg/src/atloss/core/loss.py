"""AT loss: binary penalty, its QUBO objective, and the Gumbel-Softmax relaxation.

The per-cell penalty is the XOR of the observed and forecast threshold
indicators; summed over the grid it is the QUBO objective. Relaxing the
forecast indicator with a binary Gumbel-Softmax gives

    L = mean_i (f(x_i) - sigmoid((2 y_i - 2 theta + z) / tau))^2

with the closed-form gradient

    dL_i/dy_i = -(4 / tau) (f(x_i) - zeta_i) zeta_i (1 - zeta_i).

Forecast values are pre-activation: they may be negative and are accepted as
plain arrays. Observed values may be GridFields or arrays.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.special import expit

from atloss.config import PERTURBATION_CLAMP
from atloss.core.exceptions import DimensionError, InvalidInputError, InvalidParameterError
from atloss.core.models import GridField, LossEval
from atloss.core.params import AnnealSchedule, AtLossParams
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

ArrayOrField = GridField | np.ndarray | float

_UNIFORM_GUARD = np.finfo(np.float64).eps


def as_array(values: ArrayOrField) -> np.ndarray:
    """float64 view of a field or array; rejects NaN/Inf."""
    arr = values.values if isinstance(values, GridField) else np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("inputs must be finite")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def _check_theta(theta: float) -> None:
    if not math.isfinite(theta):
        raise InvalidInputError("theta must be finite")


def indicator(values: ArrayOrField, theta: float) -> np.ndarray:
    """Vectorized step function: 1 where value >= theta, else 0."""
    _check_theta(theta)
    return (as_array(values) >= theta).astype(np.int64)


def step_indicator(k: float, theta: float) -> int:
    """1 iff k >= theta. The boundary k == theta maps to 1."""
    if not (math.isfinite(k) and math.isfinite(theta)):
        raise InvalidInputError(f"non-finite input: k={k}, theta={theta}")
    return 1 if k >= theta else 0


def binary_penalty(x: float, y: float, theta: float) -> int:
    """f(x) + f(y) - 2 f(x) f(y): 1 for a false forecast, 0 for a true one."""
    fx = step_indicator(x, theta)
    fy = step_indicator(y, theta)
    return fx + fy - 2 * fx * fy


def overall_penalty(x_field: ArrayOrField, y_field: ArrayOrField, theta: float) -> int:
    """Sum of squared indicator differences: the number of disagreeing cells."""
    x = as_array(x_field)
    y = as_array(y_field)
    check_same_shape(x, y)
    diff = indicator(x, theta) - indicator(y, theta)
    return int(np.sum(diff * diff))


def logistic_from_uniform(u: np.ndarray | float) -> np.ndarray | float:
    """Inverse logistic CDF, ln u - ln(1 - u), with u kept inside (0, 1)."""
    u = np.clip(u, _UNIFORM_GUARD, 1.0 - _UNIFORM_GUARD)
    z = np.log(u) - np.log1p(-u)
    return float(z) if np.ndim(z) == 0 else z


def sample_logistic(
    rng: np.random.Generator, size: int | tuple[int, ...] | None = None
) -> np.ndarray | float:
    """Logistic(0, 1) draws by inverse transform sampling."""
    return logistic_from_uniform(rng.random(size))


def draw_perturbation(params: AtLossParams, shape: tuple[int, ...], step: int = 0) -> np.ndarray:
    """
    Scaled, clamped logistic perturbation for one forward pass.

    The stream is derived from (seed, step) and consumed in row-major cell
    order, so it does not depend on how the evaluation is parallelized.
    Deterministic mode returns zeros.
    """
    if params.deterministic or params.perturbation_scale == 0.0:
        return np.zeros(shape)
    rng = derive_rng(params.seed, step)
    if params.shared_z:
        z = np.full(shape, sample_logistic(rng))
    else:
        z = np.asarray(sample_logistic(rng, shape))
    return np.clip(z * params.perturbation_scale, -PERTURBATION_CLAMP, PERTURBATION_CLAMP)


def _check_tau(tau: float) -> None:
    if not (math.isfinite(tau) and 0.0 < tau <= 1.0):
        raise InvalidParameterError(f"tau must lie in (0, 1], got {tau}")


def soft_indicator(
    y: np.ndarray | float, params: AtLossParams, z: np.ndarray | float = 0.0
) -> np.ndarray | float:
    """sigmoid((2y - 2 theta + z) / tau), strictly increasing in y."""
    _check_tau(params.tau)
    arg = (2.0 * np.asarray(y, dtype=np.float64) - 2.0 * params.theta + z) / params.tau
    zeta = expit(arg)
    return float(zeta) if np.ndim(zeta) == 0 else zeta


def at_loss_cells(
    x_field: ArrayOrField,
    y_field: ArrayOrField,
    params: AtLossParams,
    z: np.ndarray | float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Unreduced per-cell losses L_i and gradients dL_i/dy_i for a fixed z.

    Returns:
        (losses, grads), both shaped like y_field.
    """
    x = as_array(x_field)
    y = as_array(y_field)
    check_same_shape(x, y)
    fx = indicator(x, params.theta).astype(np.float64)
    zeta = np.asarray(soft_indicator(y, params, z))
    residual = fx - zeta
    losses = residual * residual
    grads = -(4.0 / params.tau) * residual * zeta * (1.0 - zeta)
    return losses, grads


def at_loss(
    x_field: ArrayOrField,
    y_field: ArrayOrField,
    params: AtLossParams,
    step: int = 0,
    z: np.ndarray | float | None = None,
) -> LossEval:
    """
    Mean AT loss and its gradient with respect to the forecast.

    Args:
        x_field: Observed intensities (mm/h).
        y_field: Pre-activation forecast in the same units.
        params: Loss hyperparameters.
        step: Forward-pass counter feeding the perturbation stream.
        z: Explicit perturbation; drawn from params when omitted.
           Ignored (forced to 0) in deterministic mode.

    Returns:
        LossEval whose grad is the per-cell gradient divided by n.
    """
    y = as_array(y_field)
    if params.deterministic:
        z = 0.0
    elif z is None:
        z = draw_perturbation(params, y.shape, step)
    losses, grads = at_loss_cells(x_field, y, params, z)
    n = losses.size
    return LossEval(value=float(np.mean(losses)), grad=grads / n)


def lipschitz_constant(tau: float) -> float:
    """Max |dL_i/dy_i| over y: 16 / (27 tau)."""
    _check_tau(tau)
    return 16.0 / (27.0 * tau)


def at_loss_grad_extremum(tau: float, x_indicator: int) -> tuple[float, float]:
    """
    Location and size of the per-cell gradient extremum.

    |dL_i/dy_i| peaks at zeta = 2/3 when f(x) = 0 and at zeta = 1/3 when
    f(x) = 1; in both cases the peak is 16 / (27 tau).
    """
    _check_tau(tau)
    if x_indicator not in (0, 1):
        raise InvalidInputError(f"x_indicator must be 0 or 1, got {x_indicator}")
    zeta_star = 2.0 / 3.0 if x_indicator == 0 else 1.0 / 3.0
    return zeta_star, lipschitz_constant(tau)


def anneal_tau(schedule: AnnealSchedule, epoch: int) -> float:
    """Temperature for an epoch; non-increasing and clamped to [tau_floor, tau_start]."""
    if epoch < 0:
        raise InvalidInputError(f"epoch must be >= 0, got {epoch}")
    progress = min(epoch, schedule.total_epochs) / schedule.total_epochs
    if schedule.shape == "linear":
        tau = schedule.tau_start + (schedule.tau_floor - schedule.tau_start) * progress
    else:
        tau = schedule.tau_start * (schedule.tau_floor / schedule.tau_start) ** progress
    return float(min(max(tau, schedule.tau_floor), schedule.tau_start))
