"""Validated hyperparameter models.

All models are frozen and reject unknown fields. Constructing one with an
out-of-range value raises InvalidParameterError (ConfigError for TrainConfig)
instead of pydantic's ValidationError.
"""

from __future__ import annotations

from typing import Any, ClassVar, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from atloss.config import (
    DEFAULT_ADAM_EPS,
    DEFAULT_BATCH_SIZE,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_CHARBONNIER_EPSILON,
    DEFAULT_HUBER_DELTA,
    DEFAULT_LEARNING_RATE,
    DEFAULT_PERTURBATION_SCALE,
    DEFAULT_TAU_FLOOR,
    DEFAULT_TAU_HORIZON,
    DEFAULT_TAU_START,
    DEFAULT_THRESHOLD,
    NOISE_MAX_FRACTION,
    NOISE_MIN_FRACTION,
)
from atloss.core.exceptions import AtLossError, ConfigError, InvalidParameterError

LossName = Literal["at", "mae", "mse", "huber", "charbonnier"]
BaselineName = Literal["mae", "mse", "huber", "charbonnier"]
NoiseKind = Literal["salt_and_pepper", "random_valued_impulse"]
Track = Literal["clean", "dirty"]


def describe_validation_error(exc: ValidationError) -> str:
    """One line per offending field: 'loc: message'."""
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<model>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


class ParamModel(BaseModel):
    """Frozen, strict-keyed base for every parameter set."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    error_type: ClassVar[type[AtLossError]] = InvalidParameterError

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as exc:
            raise self.error_type(
                f"{type(self).__name__}: {describe_validation_error(exc)}"
            ) from exc

    def replace(self, **changes: Any) -> ParamModel:
        """Validated copy with some fields changed."""
        return type(self)(**{**self.model_dump(), **changes})


class AtLossParams(ParamModel):
    """Hyperparameters of the AT loss.

    tau is the relaxation temperature, theta the threshold in mm/h. In
    stochastic mode z ~ Logistic(0, 1) is scaled by perturbation_scale and
    clamped to +-0.5; deterministic mode fixes z = 0. shared_z draws one z per
    forward pass instead of one per cell.
    """

    tau: float = Field(default=DEFAULT_TAU_START, gt=0.0, le=1.0)
    theta: float = Field(default=DEFAULT_THRESHOLD, ge=0.0)
    perturbation_scale: float = Field(default=DEFAULT_PERTURBATION_SCALE, ge=0.0)
    deterministic: bool = False
    shared_z: bool = False
    seed: int = 0


class AnnealSchedule(ParamModel):
    """Per-epoch temperature decay from tau_start down to tau_floor."""

    tau_start: float = Field(default=DEFAULT_TAU_START, gt=0.0, le=1.0)
    tau_floor: float = Field(default=DEFAULT_TAU_FLOOR, gt=0.0, le=1.0)
    total_epochs: int = Field(default=DEFAULT_TAU_HORIZON, ge=1)
    shape: Literal["linear", "exponential"] = "linear"

    @model_validator(mode="after")
    def _floor_below_start(self) -> AnnealSchedule:
        if self.tau_floor > self.tau_start:
            raise ValueError("tau_floor must not exceed tau_start")
        return self


class BaselineLossKind(ParamModel):
    """Which pixel-wise baseline to use and its smoothing constants."""

    kind: BaselineName = "mse"
    delta: float = Field(default=DEFAULT_HUBER_DELTA, gt=0.0)
    epsilon: float = Field(default=DEFAULT_CHARBONNIER_EPSILON, gt=0.0)


class NoiseSpec(ParamModel):
    """Impulse-noise corruption of a fraction of cells.

    fraction must lie in [min_fraction, max_fraction]; 0 disables the noise.
    """

    kind: NoiseKind = "random_valued_impulse"
    fraction: float = Field(default=0.20, ge=0.0, le=1.0)
    seed: int = 0
    min_fraction: float = Field(default=NOISE_MIN_FRACTION, ge=0.0, le=1.0)
    max_fraction: float = Field(default=NOISE_MAX_FRACTION, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _fraction_within_bounds(self) -> NoiseSpec:
        if self.min_fraction > self.max_fraction:
            raise ValueError("min_fraction must not exceed max_fraction")
        if self.fraction != 0.0 and not (self.min_fraction <= self.fraction <= self.max_fraction):
            raise ValueError(
                f"fraction {self.fraction} outside [{self.min_fraction}, {self.max_fraction}]"
            )
        return self


class StormParams(ParamModel):
    """Synthetic advecting Gaussian rain cells.

    Velocities and sigmas are in grid cells (per step); amplitudes in mm/h.
    """

    n_cells: int = Field(default=6, ge=0)
    amplitude_mean: float = Field(default=12.0, gt=0.0)
    amplitude_spread: float = Field(default=0.5, ge=0.0)
    sigma_min: float = Field(default=3.0, gt=0.0)
    sigma_max: float = Field(default=8.0, gt=0.0)
    velocity_x: float = 0.8
    velocity_y: float = 0.3
    jitter: float = Field(default=0.1, ge=0.0)
    growth_std: float = Field(default=0.05, ge=0.0)
    reversion: float = Field(default=0.1, ge=0.0, le=1.0)
    dry_probability: float = Field(default=0.02, ge=0.0, le=1.0)
    dry_spell_length: int = Field(default=8, ge=1)
    dry_ceiling: float = Field(default=0.5, ge=0.0)
    clutter_fraction: float = Field(default=0.0005, ge=0.0, le=1.0)
    clutter_amplitude: float = Field(default=80.0, gt=0.0)

    @model_validator(mode="after")
    def _sigma_order(self) -> StormParams:
        if self.sigma_min > self.sigma_max:
            raise ValueError("sigma_min must not exceed sigma_max")
        return self


class TrainConfig(ParamModel):
    """Everything one training run needs.

    The dirty track requires a NoiseSpec and the clean track forbids one.
    """

    error_type: ClassVar[type[AtLossError]] = ConfigError

    loss: LossName = "at"
    at: AtLossParams = Field(default_factory=AtLossParams)
    baseline: BaselineLossKind = Field(default_factory=BaselineLossKind)
    schedule: AnnealSchedule = Field(default_factory=AnnealSchedule)
    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    seed: int = 0
    track: Track = "clean"
    noise: NoiseSpec | None = None
    lr: float = Field(default=DEFAULT_LEARNING_RATE, gt=0.0)
    beta1: float = Field(default=DEFAULT_BETA1, ge=0.0, lt=1.0)
    beta2: float = Field(default=DEFAULT_BETA2, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=DEFAULT_ADAM_EPS, gt=0.0)
    hidden_channels: int = Field(default=16, ge=1)
    stacked_input: bool = False

    @model_validator(mode="after")
    def _track_noise_pairing(self) -> TrainConfig:
        if self.track == "dirty" and self.noise is None:
            raise ValueError("dirty track requires a noise spec")
        if self.track == "clean" and self.noise is not None:
            raise ValueError("clean track must not carry a noise spec")
        return self

    def baseline_kind(self) -> BaselineLossKind:
        """Baseline parameters with kind taken from the loss name."""
        if self.loss == "at":
            raise ConfigError("AT loss has no baseline kind")
        return BaselineLossKind(
            kind=self.loss, delta=self.baseline.delta, epsilon=self.baseline.epsilon
        )
