"""Data carriers for fields, loss evaluations, and verification scores."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from atloss.config import UNDEFINED_LITERAL, WINDOW_LENGTH
from atloss.core.exceptions import InvalidInputError, InvalidParameterError


@dataclass(frozen=True, eq=False)
class GridField:
    """Precipitation intensities (mm/h) on a height x width grid.

    Values are stored as a read-only float64 copy; they must be finite and
    non-negative.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise InvalidInputError(f"GridField needs a 2-D array, got shape {arr.shape}")
        if arr.size == 0:
            raise InvalidInputError("GridField needs at least one cell")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("GridField values must be finite")
        if np.any(arr < 0):
            raise InvalidInputError("GridField values must be >= 0 mm/h")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @classmethod
    def zeros(cls, height: int, width: int) -> GridField:
        return cls(np.zeros((height, width)))


@dataclass
class LossEval:
    """Scalar loss value and its gradient with respect to the forecast."""

    value: float
    grad: np.ndarray


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 counts of (observed, forecast) threshold exceedance."""

    hits: int
    misses: int
    false_alarms: int
    correct_negatives: int

    def __post_init__(self) -> None:
        for name in ("hits", "misses", "false_alarms", "correct_negatives"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")

    @property
    def n(self) -> int:
        return self.hits + self.misses + self.false_alarms + self.correct_negatives

    def __add__(self, other: ContingencyTable) -> ContingencyTable:
        return ContingencyTable(
            hits=self.hits + other.hits,
            misses=self.misses + other.misses,
            false_alarms=self.false_alarms + other.false_alarms,
            correct_negatives=self.correct_negatives + other.correct_negatives,
        )


@dataclass(frozen=True)
class MetricValue:
    """A score, or the explicit undefined marker for a zero denominator."""

    value: float | None = None

    @classmethod
    def undefined(cls) -> MetricValue:
        return cls(None)

    @classmethod
    def ratio(cls, numerator: float, denominator: float) -> MetricValue:
        if denominator == 0:
            return cls.undefined()
        return cls(numerator / denominator)

    @property
    def is_defined(self) -> bool:
        return self.value is not None

    def to_csv(self) -> str:
        """Full-precision text, or the undefined literal."""
        return UNDEFINED_LITERAL if self.value is None else repr(float(self.value))

    def to_json(self) -> float | str:
        return UNDEFINED_LITERAL if self.value is None else float(self.value)

    def __str__(self) -> str:
        return UNDEFINED_LITERAL if self.value is None else f"{self.value:.4f}"


@dataclass(frozen=True)
class NormalizationSpec:
    """Affine map between [physical_min, physical_max] (mm/h) and [-1, 1]."""

    physical_min: float = 0.0
    physical_max: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.physical_min) and math.isfinite(self.physical_max)):
            raise InvalidParameterError("normalization bounds must be finite")
        if self.physical_max <= self.physical_min:
            raise InvalidParameterError(
                f"physical_max ({self.physical_max}) must exceed physical_min ({self.physical_min})"
            )

    @property
    def span(self) -> float:
        return self.physical_max - self.physical_min


@dataclass
class WindowedDataset:
    """Ordered frames viewed as overlapping windows of consecutive steps.

    Attributes:
        frames: (steps, height, width) physical-scale intensities.
        norm: Normalization computed over the full sequence.
        dt_minutes: Time between consecutive frames.
        window: Steps per window.
    """

    frames: np.ndarray
    norm: NormalizationSpec
    dt_minutes: float = 10.0
    window: int = WINDOW_LENGTH
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.frames.shape[0]) - self.window + 1

    @property
    def windows(self) -> np.ndarray:
        """Read-only (num_windows, window, height, width) view; stride 1."""
        view = np.lib.stride_tricks.sliding_window_view(self.frames, self.window, axis=0)
        return np.moveaxis(view, -1, 1)

    @property
    def field_shape(self) -> tuple[int, int]:
        return (int(self.frames.shape[1]), int(self.frames.shape[2]))

    def window_fields(self, index: int) -> list[GridField]:
        """The window at index as GridFields, in temporal order."""
        return [GridField(frame) for frame in self.windows[index]]
