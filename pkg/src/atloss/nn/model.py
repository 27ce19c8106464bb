"""Two-layer forecaster: conv -> instance norm -> Swish -> conv."""

from __future__ import annotations

import logging

import numpy as np

from atloss.core.exceptions import DimensionError, InvalidInputError, MissingCacheError
from atloss.nn.layers import Conv2d, InstanceNorm2d, Layer, Swish
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

_INIT_STREAM = 0xC0


class CnnModel:
    """
    Maps (B, in_channels, H, W) normalized inputs to a (B, 1, H, W) pre-activation forecast.

    Spatial size is preserved (kernel 3, stride 1, padding 1). use_norm and
    use_activation drop the middle layers, which gives a purely linear model.
    """

    def __init__(
        self,
        in_channels: int = 1,
        hidden_channels: int = 16,
        seed: int = 0,
        use_norm: bool = True,
        use_activation: bool = True,
    ) -> None:
        self.in_channels = in_channels
        self.hidden_channels = hidden_channels
        self.use_norm = use_norm
        self.use_activation = use_activation
        rng = derive_rng(seed, _INIT_STREAM)
        self.conv1 = Conv2d(in_channels, hidden_channels, rng=rng)
        self.layers: dict[str, Layer] = {"conv1": self.conv1}
        if use_norm:
            self.layers["norm"] = InstanceNorm2d(hidden_channels)
        if use_activation:
            self.layers["act"] = Swish()
        self.layers["conv2"] = Conv2d(hidden_channels, 1, rng=rng)
        self._forwarded = False
        self.input_grad: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise DimensionError(f"expected (B, {self.in_channels}, H, W), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("model input must be finite")
        out = x
        for layer in self.layers.values():
            out = layer.forward(out)
        self._forwarded = True
        return out

    def backward(self, upstream: np.ndarray, input_grad: bool = True) -> dict[str, np.ndarray]:
        """
        Backpropagates dLoss/dOutput from the last forward pass.

        Returns:
            Parameter gradients keyed like parameters(). With input_grad the
            gradient with respect to the input is left in input_grad;
            otherwise the first convolution only accumulates its parameters.
        """
        if not self._forwarded:
            raise MissingCacheError("backward called before forward")
        self.zero_grad()
        grad = upstream
        for layer in reversed(list(self.layers.values())[1:]):
            grad = layer.backward(grad)
        if input_grad:
            self.input_grad = self.conv1.backward(grad)
        else:
            self.conv1.backward_params(grad)
            self.input_grad = None
        return self.gradients()

    def zero_grad(self) -> None:
        for layer in self.layers.values():
            layer.zero_grad()

    def parameters(self) -> dict[str, np.ndarray]:
        """Live parameter arrays, keyed 'layer.param'."""
        return {
            f"{lname}.{pname}": value
            for lname, layer in self.layers.items()
            for pname, value in layer.params.items()
        }

    def gradients(self) -> dict[str, np.ndarray]:
        return {
            f"{lname}.{pname}": value
            for lname, layer in self.layers.items()
            for pname, value in layer.grads.items()
        }

    def load_parameters(self, values: dict[str, np.ndarray]) -> None:
        """Copies values into the live arrays; names and shapes must match exactly."""
        current = self.parameters()
        if set(values) != set(current):
            raise DimensionError(
                f"parameter names differ: {sorted(set(values) ^ set(current))}"
            )
        for name, array in values.items():
            if array.shape != current[name].shape:
                raise DimensionError(
                    f"{name}: shape {array.shape} != {current[name].shape}"
                )
            current[name][...] = array

    def config(self) -> dict:
        return {
            "in_channels": self.in_channels,
            "hidden_channels": self.hidden_channels,
            "use_norm": self.use_norm,
            "use_activation": self.use_activation,
        }

    def predict(self, x: np.ndarray, batch_size: int = 64) -> np.ndarray:
        """Batched forward pass."""
        outputs = [self.forward(x[i : i + batch_size]) for i in range(0, x.shape[0], batch_size)]
        return np.concatenate(outputs, axis=0)
