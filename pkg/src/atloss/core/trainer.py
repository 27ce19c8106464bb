"""Training, forecast evaluation, and the clean/dirty consistency experiment."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from atloss.config import DEFAULT_THRESHOLD, LIGHT_THRESHOLD
from atloss.core.baselines import baseline_loss
from atloss.core.exceptions import ConfigError, InvalidInputError, NonFiniteLossError
from atloss.core.loss import anneal_tau, at_loss
from atloss.core.metrics import MetricRow, mae_psnr, score_stack
from atloss.core.models import GridField, LossEval, MetricValue, NormalizationSpec, WindowedDataset
from atloss.core.noise import inject_noise
from atloss.core.params import AtLossParams, TrainConfig
from atloss.core.windows import denormalize, normalize
from atloss.nn.model import CnnModel
from atloss.nn.optim import Adam
from atloss.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

_SHUFFLE_STREAM = 1
_NOISE_STREAM = 2
_STACKED_FRAMES = 5
_PREDICT_BATCH = 64


@dataclass
class EpochRecord:
    """One row of the metric log; tau is None for baseline losses."""

    epoch: int
    tau: float | None
    train_loss: float
    val_csi: MetricValue
    val_hss: MetricValue
    val_pod: MetricValue
    val_far: MetricValue


@dataclass
class TrainResult:
    model: CnnModel
    log: list[EpochRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


@dataclass
class ConsistencyResult:
    """Cross-track agreement of clean and dirty forecasts."""

    mae: float
    psnr: float
    clean: TrainResult
    dirty: TrainResult


def split_pairs(dataset: WindowedDataset, stacked_input: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """
    (inputs, targets) in physical units for 1-step forecasting.

    The input is the second-to-last step of each window (or the five steps
    before the target when stacked); the target is the last step.
    """
    windows = dataset.windows
    last = dataset.window - 1
    if stacked_input:
        inputs = windows[:, last - _STACKED_FRAMES : last]
    else:
        inputs = windows[:, last - 1 : last]
    return np.ascontiguousarray(inputs), np.ascontiguousarray(windows[:, last : last + 1])


def forecast(
    model: CnnModel, inputs: np.ndarray, norm: NormalizationSpec, batch_size: int = _PREDICT_BATCH
) -> np.ndarray:
    """Physical-unit forecasts for physical-unit inputs."""
    return denormalize(model.predict(normalize(inputs, norm), batch_size), norm)


def _corrupt_inputs(
    inputs: np.ndarray, config: TrainConfig, norm: NormalizationSpec, epoch: int
) -> np.ndarray:
    assert config.noise is not None
    noisy = np.empty_like(inputs)
    for i in range(inputs.shape[0]):
        for c in range(inputs.shape[1]):
            noisy[i, c] = inject_noise(
                GridField(inputs[i, c]),
                config.noise,
                physical_min=norm.physical_min,
                physical_max=norm.physical_max,
                stream=(_NOISE_STREAM, epoch, i, c),
            ).values
    return noisy


def _batch_loss(
    config: TrainConfig,
    at_params: AtLossParams | None,
    pred_norm: np.ndarray,
    target_phys: np.ndarray,
    target_norm: np.ndarray,
    norm: NormalizationSpec,
    step: int,
) -> LossEval:
    if at_params is not None:
        # theta is in mm/h, so the AT loss sees denormalized predictions
        result = at_loss(target_phys, denormalize(pred_norm, norm), at_params, step=step)
        return LossEval(result.value, result.grad * (norm.span / 2.0))
    return baseline_loss(target_norm, pred_norm, config.baseline_kind())


def _validation_scores(
    model: CnnModel,
    inputs: np.ndarray,
    targets: np.ndarray,
    norm: NormalizationSpec,
    theta: float,
) -> tuple[MetricValue, MetricValue, MetricValue, MetricValue]:
    scores = score_stack(targets[:, 0], forecast(model, inputs, norm)[:, 0], theta)
    return scores.csi, scores.hss, scores.pod, scores.far


def train(
    config: TrainConfig, dataset: WindowedDataset, eval_set: WindowedDataset | None = None
) -> TrainResult:
    """
    Trains a fresh CnnModel for 1-step forecasting.

    Args:
        config: Loss, schedule, optimizer and track settings.
        dataset: Training windows.
        eval_set: Validation windows; the training windows are used when omitted.

    Returns:
        The trained model and one EpochRecord per epoch.

    Raises:
        InvalidInputError: The dataset has no windows.
        NonFiniteLossError: A batch loss became NaN/Inf.
    """
    if len(dataset) <= 0:
        raise InvalidInputError("training dataset has no windows")

    norm = dataset.norm
    model = CnnModel(
        in_channels=_STACKED_FRAMES if config.stacked_input else 1,
        hidden_channels=config.hidden_channels,
        seed=config.seed,
    )
    optimizer = Adam(
        model.parameters(), lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps
    )

    inputs, targets = split_pairs(dataset, config.stacked_input)
    targets_norm = normalize(targets, norm)
    val_inputs, val_targets = split_pairs(eval_set or dataset, config.stacked_input)
    theta = config.at.theta if config.loss == "at" else DEFAULT_THRESHOLD

    n = inputs.shape[0]
    result = TrainResult(
        model=model,
        metadata={
            "loss": config.loss,
            "track": config.track,
            "seed": config.seed,
            "windows": n,
            "init": "uniform fan-in, bound 1/sqrt(fan_in)",
            "loss_space": "physical mm/h" if config.loss == "at" else "normalized [-1, 1]",
            "input": "stacked 5 frames" if config.stacked_input else "step 5 of 6",
        },
    )

    step = 0
    for epoch in range(config.epochs):
        at_params = None
        if config.loss == "at":
            at_params = config.at.replace(tau=anneal_tau(config.schedule, epoch))

        epoch_inputs = (
            _corrupt_inputs(inputs, config, norm, epoch) if config.track == "dirty" else inputs
        )
        epoch_inputs_norm = normalize(epoch_inputs, norm)
        order = derive_rng(config.seed, _SHUFFLE_STREAM, epoch).permutation(n)

        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            pred = model.forward(epoch_inputs_norm[idx])
            evaluation = _batch_loss(
                config, at_params, pred, targets[idx], targets_norm[idx], norm, step
            )
            if not math.isfinite(evaluation.value) or not np.all(np.isfinite(evaluation.grad)):
                raise NonFiniteLossError(
                    f"non-finite loss at epoch {epoch}, step {step}: value={evaluation.value}, "
                    f"loss={config.loss}, tau={at_params.tau if at_params else None}"
                )
            optimizer.step(model.backward(evaluation.grad, input_grad=False))
            total += evaluation.value * idx.size
            logger.debug(f"epoch {epoch} step {step}: loss={evaluation.value:.6g}")
            step += 1

        csi_v, hss_v, pod_v, far_v = _validation_scores(model, val_inputs, val_targets, norm, theta)
        record = EpochRecord(
            epoch=epoch,
            tau=at_params.tau if at_params else None,
            train_loss=total / n,
            val_csi=csi_v,
            val_hss=hss_v,
            val_pod=pod_v,
            val_far=far_v,
        )
        result.log.append(record)
        tau_text = f"{record.tau:.3f}" if record.tau is not None else "-"
        logger.info(
            f"[{config.loss}/{config.track}] epoch {epoch + 1}/{config.epochs} "
            f"tau={tau_text} loss={record.train_loss:.6g} val_csi={record.val_csi}"
        )

    return result


def evaluate(
    model: CnnModel,
    dataset: WindowedDataset,
    thresholds: tuple[float, ...] = (DEFAULT_THRESHOLD, LIGHT_THRESHOLD),
    lead_steps: tuple[int, ...] = (1,),
    stacked_input: bool = False,
) -> list[MetricRow]:
    """
    Scores forecasts at several thresholds and lead times.

    For lead L the single-frame model is rolled out autoregressively from step
    window-L to the last step. Stacked-input models only support L = 1.
    Categorical scores are per-window means over defined values; excluded
    counts the windows whose CSI is undefined.
    """
    windows = dataset.windows
    last = dataset.window - 1
    observed = windows[:, last]
    peak = float(observed.max() - observed.min()) or dataset.norm.span
    rows = []
    for lead in lead_steps:
        if lead < 1 or lead > last:
            raise InvalidInputError(f"lead must lie in [1, {last}], got {lead}")
        if stacked_input:
            if lead != 1:
                raise InvalidInputError("stacked-input models only forecast one step ahead")
            state = forecast(model, split_pairs(dataset, True)[0], dataset.norm)
        else:
            state = np.ascontiguousarray(windows[:, last - lead : last - lead + 1])
            for _ in range(lead):
                state = forecast(model, state, dataset.norm)
        predicted = state[:, 0]
        mae, psnr = mae_psnr(observed, predicted, peak)
        for theta in thresholds:
            scores = score_stack(observed, predicted, theta)
            rows.append(
                MetricRow(
                    threshold=theta,
                    lead_time=lead * dataset.dt_minutes,
                    csi=scores.csi,
                    hss=scores.hss,
                    pod=scores.pod,
                    far=scores.far,
                    mae=mae,
                    psnr=psnr,
                    excluded=scores.excluded,
                )
            )
    return rows


def check_track_pair(clean: TrainConfig, dirty: TrainConfig) -> None:
    """Raises ConfigError unless the configs differ only in track and noise."""
    if clean.track != "clean" or dirty.track != "dirty":
        raise ConfigError("expected a clean config and a dirty config, in that order")
    shared = {"track", "noise"}
    a = clean.model_dump(exclude=shared)
    b = dirty.model_dump(exclude=shared)
    if a != b:
        differing = sorted(k for k in a if a[k] != b[k])
        raise ConfigError(f"track configs differ beyond track/noise: {differing}")


def consistency_experiment(
    clean_config: TrainConfig,
    dirty_config: TrainConfig,
    dataset: WindowedDataset,
    eval_set: WindowedDataset | None = None,
    clean_result: TrainResult | None = None,
) -> ConsistencyResult:
    """
    Trains both tracks and compares their forecasts on the shared eval inputs.

    Lower MAE and higher PSNR mean the loss is more consistent under noise.
    The PSNR peak is the data range of the eval targets. A precomputed clean
    run can be passed to avoid retraining it for several noise kinds.
    """
    check_track_pair(clean_config, dirty_config)
    clean = clean_result or train(clean_config, dataset, eval_set)
    dirty = train(dirty_config, dataset, eval_set)

    target_set = eval_set or dataset
    inputs, targets = split_pairs(target_set, clean_config.stacked_input)
    peak = float(targets.max() - targets.min()) or target_set.norm.span
    clean_pred = forecast(clean.model, inputs, target_set.norm)
    dirty_pred = forecast(dirty.model, inputs, target_set.norm)
    mae, psnr = mae_psnr(clean_pred, dirty_pred, peak)
    logger.info(
        f"[{clean_config.loss}] cross-track MAE={mae:.6g} PSNR={psnr:.4f} dB"
    )
    return ConsistencyResult(mae=mae, psnr=psnr, clean=clean, dirty=dirty)
