"""Layers with explicit forward/backward passes on (batch, channels, H, W) arrays.

Each layer caches what its backward pass needs during forward; calling
backward first raises MissingCacheError. Parameter gradients accumulate
until zero_grad().
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from atloss.config import INSTANCE_NORM_EPS
from atloss.core.exceptions import DimensionError, MissingCacheError


class Layer:
    """Base layer: named parameter and gradient arrays."""

    def __init__(self) -> None:
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache: tuple | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def zero_grad(self) -> None:
        for name, value in self.params.items():
            self.grads[name] = np.zeros_like(value)

    def _require_cache(self) -> tuple:
        if self._cache is None:
            raise MissingCacheError(f"{type(self).__name__}.backward called before forward")
        return self._cache


class Conv2d(Layer):
    """
    Stride-1 2-D convolution (cross-correlation) with zero padding.

    The input is unfolded once into a (C*k*k, B*H*W) matrix so forward and
    both backward products are single BLAS matmuls.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        padding: int = 1,
        rng: np.random.Generator | None = None,
    ) -> None:
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.padding = padding
        rng = rng or np.random.default_rng(0)
        bound = 1.0 / math.sqrt(in_channels * kernel_size * kernel_size)
        self.params["weight"] = rng.uniform(
            -bound, bound, (out_channels, in_channels, kernel_size, kernel_size)
        )
        self.params["bias"] = rng.uniform(-bound, bound, out_channels)
        self.zero_grad()

    def _out_size(self, h: int, w: int) -> tuple[int, int]:
        k, p = self.kernel_size, self.padding
        return h + 2 * p - k + 1, w + 2 * p - k + 1

    def _unfold(self, x: np.ndarray) -> np.ndarray:
        b, c, h, w = x.shape
        k, p = self.kernel_size, self.padding
        oh, ow = self._out_size(h, w)
        padded = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        cols = np.empty((c, k, k, b, oh, ow))
        for i in range(k):
            for j in range(k):
                cols[:, i, j] = padded[:, :, i : i + oh, j : j + ow].transpose(1, 0, 2, 3)
        return cols.reshape(c * k * k, b * oh * ow)

    def _fold(self, cols: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
        b, c, h, w = shape
        k, p = self.kernel_size, self.padding
        oh, ow = self._out_size(h, w)
        cols = cols.reshape(c, k, k, b, oh, ow)
        padded = np.zeros((b, c, h + 2 * p, w + 2 * p))
        for i in range(k):
            for j in range(k):
                padded[:, :, i : i + oh, j : j + ow] += cols[:, i, j].transpose(1, 0, 2, 3)
        return padded[:, :, p : p + h, p : p + w]

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise DimensionError(
                f"Conv2d expects (B, {self.in_channels}, H, W), got {x.shape}"
            )
        b, _, h, w = x.shape
        oh, ow = self._out_size(h, w)
        cols = self._unfold(x)
        weight = self.params["weight"].reshape(self.out_channels, -1)
        out = (weight @ cols).reshape(self.out_channels, b, oh, ow).transpose(1, 0, 2, 3)
        out = out + self.params["bias"][None, :, None, None]
        self._cache = (cols, x.shape)
        return out

    def _upstream_matrix(self, upstream: np.ndarray) -> np.ndarray:
        return upstream.transpose(1, 0, 2, 3).reshape(self.out_channels, -1)

    def backward_params(self, upstream: np.ndarray) -> None:
        """Accumulates weight and bias gradients only."""
        cols, _ = self._require_cache()
        up = self._upstream_matrix(upstream)
        self.grads["weight"] += (up @ cols.T).reshape(self.params["weight"].shape)
        self.grads["bias"] += up.sum(axis=1)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        _, shape = self._require_cache()
        self.backward_params(upstream)
        weight = self.params["weight"].reshape(self.out_channels, -1)
        return self._fold(weight.T @ self._upstream_matrix(upstream), shape)


class InstanceNorm2d(Layer):
    """Per-sample, per-channel normalization over H x W with affine scale and shift."""

    def __init__(self, channels: int, eps: float = INSTANCE_NORM_EPS) -> None:
        super().__init__()
        self.channels = channels
        self.eps = eps
        self.params["gamma"] = np.ones(channels)
        self.params["beta"] = np.zeros(channels)
        self.zero_grad()

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise DimensionError(f"InstanceNorm2d expects (B, {self.channels}, H, W), got {x.shape}")
        mean = x.mean(axis=(2, 3), keepdims=True)
        var = x.var(axis=(2, 3), keepdims=True)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std)
        return self.params["gamma"][None, :, None, None] * x_hat + self.params["beta"][
            None, :, None, None
        ]

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x_hat, inv_std = self._require_cache()
        self.grads["gamma"] += (upstream * x_hat).sum(axis=(0, 2, 3))
        self.grads["beta"] += upstream.sum(axis=(0, 2, 3))
        d_hat = upstream * self.params["gamma"][None, :, None, None]
        n = x_hat.shape[2] * x_hat.shape[3]
        return (inv_std / n) * (
            n * d_hat
            - d_hat.sum(axis=(2, 3), keepdims=True)
            - x_hat * (d_hat * x_hat).sum(axis=(2, 3), keepdims=True)
        )


class Swish(Layer):
    """x * sigmoid(x)."""

    def forward(self, x: np.ndarray) -> np.ndarray:
        s = expit(x)
        self._cache = (x, s)
        return x * s

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x, s = self._require_cache()
        return upstream * s * (1.0 + x * (1.0 - s))
