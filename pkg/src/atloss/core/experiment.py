"""Experiment configuration (INI <-> pydantic) and suite orchestration.

An experiment file has one section per concern. Every key is optional;
unknown sections and keys are rejected. Lists are comma separated and an
empty value means "not set".

    [run]
    seed = 0

    [train]
    loss = at
    epochs = 30

    [consistency]
    losses = at, mse
    seeds = 0, 1, 2
"""

from __future__ import annotations

import configparser
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, ClassVar, Literal

import numpy as np
from pydantic import Field, ValidationError, field_validator

from atloss.config import (
    DEFAULT_ADAM_EPS,
    DEFAULT_BATCH_SIZE,
    DEFAULT_BETA1,
    DEFAULT_BETA2,
    DEFAULT_DT_MINUTES,
    DEFAULT_LEARNING_RATE,
    DEFAULT_THRESHOLD,
    DEFAULT_TUKEY_K,
    DEFAULT_WET_MIN_VALUE,
    LIGHT_THRESHOLD,
    LOSS_KINDS,
    NOISE_KINDS,
    WINDOW_LENGTH,
)
from atloss.core.exceptions import AtLossError, ConfigError, StageError
from atloss.core.models import WindowedDataset
from atloss.core.params import (
    AnnealSchedule,
    AtLossParams,
    BaselineLossKind,
    LossName,
    NoiseKind,
    NoiseSpec,
    ParamModel,
    StormParams,
    TrainConfig,
    describe_validation_error,
)
from atloss.core.refine import refine_sequence
from atloss.core.synthetic import generate_frames
from atloss.core.trainer import TrainResult, consistency_experiment, train
from atloss.core.windows import split_sequence
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class Section(ParamModel):
    error_type: ClassVar[type[AtLossError]] = ConfigError


class RunSection(Section):
    seed: int = 0
    out_dir: str | None = None
    format: Literal["csv", "json"] = "csv"


class DataSection(Section):
    """Where frames come from and how they are refined and windowed."""

    dataset: str | None = None
    height: int = Field(default=64, ge=1)
    width: int = Field(default=64, ge=1)
    steps: int = Field(default=505, ge=WINDOW_LENGTH)
    dt_minutes: float = Field(default=DEFAULT_DT_MINUTES, gt=0.0)
    window: int = Field(default=WINDOW_LENGTH, ge=2)
    refine: bool = True
    refine_k: float = Field(default=DEFAULT_TUKEY_K, ge=0.0)
    refine_wet_only: bool = True
    refine_min_value: float = Field(default=DEFAULT_WET_MIN_VALUE, ge=0.0)
    physical_max: float | None = Field(default=None, gt=0.0)
    eval_fraction: float = Field(default=0.2, ge=0.0, lt=1.0)


class TrainSection(Section):
    loss: LossName = "at"
    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    lr: float = Field(default=DEFAULT_LEARNING_RATE, gt=0.0)
    beta1: float = Field(default=DEFAULT_BETA1, ge=0.0, lt=1.0)
    beta2: float = Field(default=DEFAULT_BETA2, ge=0.0, lt=1.0)
    adam_eps: float = Field(default=DEFAULT_ADAM_EPS, gt=0.0)
    hidden_channels: int = Field(default=16, ge=1)
    stacked_input: bool = False
    thresholds: list[float] = Field(default_factory=lambda: [DEFAULT_THRESHOLD, LIGHT_THRESHOLD])
    lead_steps: list[int] = Field(default_factory=lambda: [1, 2, 3])

    split_lists = field_validator("thresholds", "lead_steps", mode="before")(_split_list)


class GradcheckSection(Section):
    cases: int = Field(default=1000, ge=1)
    step: float = Field(default=1e-5, gt=0.0)
    tolerance: float = Field(default=1e-6, gt=0.0)
    layer_step: float = Field(default=1e-4, gt=0.0)
    layer_tolerance: float = Field(default=1e-4, gt=0.0)
    floor: float = Field(default=1e-3, gt=0.0)


class LipschitzSection(Section):
    taus: list[float] = Field(default_factory=lambda: [1.0, 0.8, 0.6, 0.3, 0.05])
    grid_points: int = Field(default=1_000_000, ge=3)
    theta: float = Field(default=DEFAULT_THRESHOLD, ge=0.0)
    tolerance: float = Field(default=1e-9, ge=0.0)
    extremum_tolerance: float = Field(default=1e-3, gt=0.0)

    split_lists = field_validator("taus", mode="before")(_split_list)


class OracleSection(Section):
    k: int = Field(default=10, ge=1)
    tau: float = Field(default=0.01, gt=0.0, le=1.0)
    margin: float = Field(default=0.5, gt=0.0)
    theta: float = Field(default=DEFAULT_THRESHOLD, ge=0.0)


class ConsistencySection(Section):
    losses: list[LossName] = Field(default_factory=lambda: list(LOSS_KINDS))
    noise_kinds: list[NoiseKind] = Field(default_factory=lambda: list(NOISE_KINDS))
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    plots: bool = False

    split_lists = field_validator("losses", "noise_kinds", "seeds", mode="before")(_split_list)


class ExperimentConfig(Section):
    """All sections of an experiment file."""

    run: RunSection = Field(default_factory=RunSection)
    loss: AtLossParams = Field(default_factory=AtLossParams)
    baseline: BaselineLossKind = Field(default_factory=BaselineLossKind)
    schedule: AnnealSchedule = Field(default_factory=AnnealSchedule)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    storm: StormParams = Field(default_factory=StormParams)
    data: DataSection = Field(default_factory=DataSection)
    train: TrainSection = Field(default_factory=TrainSection)
    gradcheck: GradcheckSection = Field(default_factory=GradcheckSection)
    lipschitz: LipschitzSection = Field(default_factory=LipschitzSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    consistency: ConsistencySection = Field(default_factory=ConsistencySection)

    def with_overrides(self, seed: int | None = None, out_dir: Path | None = None) -> ExperimentConfig:
        """CLI flags take precedence over the file."""
        changes: dict[str, Any] = {}
        if seed is not None:
            changes["seed"] = seed
        if out_dir is not None:
            changes["out_dir"] = str(out_dir)
        if not changes:
            return self
        try:
            return self.replace(run=self.run.replace(**changes))  # type: ignore[return-value]
        except AtLossError as e:
            raise ConfigError(str(e)) from e

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # type: ignore[assignment,method-assign]
        for name in type(self).model_fields:
            section = getattr(self, name)
            parser[name] = {k: _format_value(v) for k, v in section.model_dump().items()}
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    """
    Parses experiment INI text.

    Raises:
        ConfigError: Syntax error, unknown section or key, or invalid value.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from e

    known = set(ExperimentConfig.model_fields)
    unknown = [s for s in parser.sections() if s not in known]
    if unknown:
        raise ConfigError(f"{source}: unknown section(s): {', '.join(unknown)}")

    sections: dict[str, ParamModel] = {}
    for name in parser.sections():
        model = ExperimentConfig.model_fields[name].annotation
        values = {k: (v.strip() or None) for k, v in parser.items(name)}
        # Parameter models raise InvalidParameterError from their own __init__
        try:
            sections[name] = model.model_validate(values)  # type: ignore[union-attr]
        except ValidationError as e:
            raise ConfigError(f"{source}: [{name}] {describe_validation_error(e)}") from e
        except AtLossError as e:
            raise ConfigError(f"{source}: [{name}] {e}") from e
    try:
        return ExperimentConfig(**sections)
    except AtLossError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_config(path: Path | None) -> ExperimentConfig:
    """Config from file, or all defaults when path is None."""
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, source=str(path))


def build_train_config(
    cfg: ExperimentConfig,
    loss: str | None = None,
    seed: int | None = None,
    noise_kind: str | None = None,
) -> TrainConfig:
    """
    TrainConfig for one run; a noise_kind selects the dirty track.

    The run seed also seeds the perturbation stream and, mixed with the
    noise seed, the corruption pattern.
    """
    seed = cfg.run.seed if seed is None else seed
    noise = None
    if noise_kind is not None:
        noise_seed = int(derive_rng(cfg.noise.seed, seed).integers(1 << 31))
        noise = cfg.noise.replace(kind=noise_kind, seed=noise_seed)
    t = cfg.train
    return TrainConfig(
        loss=loss or t.loss,
        at=cfg.loss.replace(seed=seed),
        baseline=cfg.baseline,
        schedule=cfg.schedule,
        epochs=t.epochs,
        batch_size=t.batch_size,
        seed=seed,
        track="clean" if noise is None else "dirty",
        noise=noise,
        lr=t.lr,
        beta1=t.beta1,
        beta2=t.beta2,
        adam_eps=t.adam_eps,
        hidden_channels=t.hidden_channels,
        stacked_input=t.stacked_input,
    )


def load_frames(cfg: ExperimentConfig) -> np.ndarray:
    """Frames from the configured grid file, or freshly synthesized with the run seed."""
    d = cfg.data
    if d.dataset:
        from atloss.parsers.grid_parser import read_grid_sequence

        return read_grid_sequence(Path(d.dataset))
    return generate_frames(d.height, d.width, d.steps, cfg.storm, cfg.run.seed)


def prepare_datasets(
    cfg: ExperimentConfig, frames: np.ndarray
) -> tuple[WindowedDataset, WindowedDataset | None]:
    """Refines (when enabled) and splits frames into train and eval windows."""
    d = cfg.data
    if d.refine:
        try:
            frames, _ = refine_sequence(frames, d.refine_k, d.refine_wet_only, d.refine_min_value)
        except AtLossError as e:
            raise StageError("refine", e) from e
    return split_sequence(frames, d.eval_fraction, d.window, d.dt_minutes, d.physical_max)


@dataclass
class SuiteRow:
    """Cross-track agreement of one loss under one noise kind and seed."""

    loss: str
    noise_kind: str
    seed: int
    mae: float
    psnr: float


@dataclass
class SuiteResult:
    rows: list[SuiteRow] = field(default_factory=list)
    logs: dict[tuple[str, str, int], TrainResult] = field(default_factory=dict)

    def summary(self) -> list[dict]:
        """Mean MAE/PSNR per (loss, noise kind), in first-seen order."""
        keys: list[tuple[str, str]] = []
        for r in self.rows:
            if (r.loss, r.noise_kind) not in keys:
                keys.append((r.loss, r.noise_kind))
        table = []
        for loss, kind in keys:
            group = [r for r in self.rows if r.loss == loss and r.noise_kind == kind]
            table.append(
                {
                    "loss": loss,
                    "noise_kind": kind,
                    "seeds": len(group),
                    "mae_mean": float(np.mean([r.mae for r in group])),
                    "psnr_mean": float(np.mean([r.psnr for r in group])),
                }
            )
        return table

    def wins(self, loss: str, rival: str, noise_kind: str) -> tuple[int, int]:
        """Seeds where loss has strictly lower MAE and strictly higher PSNR than rival."""
        ours = {r.seed: r for r in self.rows if r.loss == loss and r.noise_kind == noise_kind}
        theirs = {r.seed: r for r in self.rows if r.loss == rival and r.noise_kind == noise_kind}
        shared = sorted(set(ours) & set(theirs))
        won = sum(
            1 for s in shared if ours[s].mae < theirs[s].mae and ours[s].psnr > theirs[s].psnr
        )
        return won, len(shared)


def run_consistency_suite(
    cfg: ExperimentConfig,
    train_set: WindowedDataset,
    eval_set: WindowedDataset | None = None,
) -> SuiteResult:
    """
    Every configured loss x seed x noise kind; the clean track is trained once
    per (loss, seed) and shared across noise kinds.
    """
    result = SuiteResult()
    c = cfg.consistency
    for loss in c.losses:
        for seed in c.seeds:
            clean_cfg = build_train_config(cfg, loss=loss, seed=seed)
            try:
                clean = train(clean_cfg, train_set, eval_set)
            except AtLossError as e:
                raise StageError(f"train {loss}/clean/seed {seed}", e) from e
            result.logs[(loss, "clean", seed)] = clean
            for kind in c.noise_kinds:
                dirty_cfg = build_train_config(cfg, loss=loss, seed=seed, noise_kind=kind)
                try:
                    outcome = consistency_experiment(
                        clean_cfg, dirty_cfg, train_set, eval_set, clean_result=clean
                    )
                except AtLossError as e:
                    raise StageError(f"train {loss}/{kind}/seed {seed}", e) from e
                result.logs[(loss, kind, seed)] = outcome.dirty
                result.rows.append(SuiteRow(loss, kind, seed, outcome.mae, outcome.psnr))
    return result
