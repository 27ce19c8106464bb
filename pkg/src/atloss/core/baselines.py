"""Pixel-wise baseline losses with analytic gradients.

With d = y - x per cell:
    mae          |d|                      (subgradient 0 at d = 0)
    mse          d^2                      (not halved)
    huber        d^2 / 2 if |d| <= delta, else delta (|d| - delta / 2)
    charbonnier  sqrt(d^2 + eps^2)
All values are means over cells; gradients are divided by n.
"""

import numpy as np

from atloss.core.loss import ArrayOrField, as_array, check_same_shape
from atloss.core.models import LossEval
from atloss.core.params import BaselineLossKind


def _cells(d: np.ndarray, kind: BaselineLossKind) -> tuple[np.ndarray, np.ndarray]:
    if kind.kind == "mae":
        return np.abs(d), np.sign(d)
    if kind.kind == "mse":
        return d * d, 2.0 * d
    if kind.kind == "huber":
        a = np.abs(d)
        quadratic = a <= kind.delta
        values = np.where(quadratic, 0.5 * d * d, kind.delta * (a - 0.5 * kind.delta))
        grads = np.where(quadratic, d, kind.delta * np.sign(d))
        return values, grads
    root = np.sqrt(d * d + kind.epsilon * kind.epsilon)
    return root, d / root


def baseline_loss(
    x_field: ArrayOrField, y_field: ArrayOrField, kind: BaselineLossKind
) -> LossEval:
    """Mean baseline loss of forecast y against observation x."""
    x = as_array(x_field)
    y = as_array(y_field)
    check_same_shape(x, y)
    values, grads = _cells(y - x, kind)
    return LossEval(value=float(np.mean(values)), grad=grads / values.size)
