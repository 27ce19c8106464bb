"""Train command - one training run with checkpoint, epoch log and metrics."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import config_options, exit_on_error, load_experiment, print_table
from atloss.config import ExitCode
from atloss.core.exceptions import AtLossError, StageError
from atloss.core.experiment import build_train_config, load_frames, prepare_datasets
from atloss.core.trainer import evaluate, forecast, split_pairs, train as train_model
from atloss.exporters.checkpoint_exporter import export_checkpoint
from atloss.exporters.csv_exporter import (
    EPOCH_COLUMNS,
    METRIC_COLUMNS,
    epoch_record,
    export_epoch_log,
    export_metric_rows,
    metric_row_record,
)
from atloss.utils.logging import attach_run_log, console, log_timing, setup_logging

logger = logging.getLogger(__name__)


@click.command()
@config_options
@click.option(
    "--dataset",
    "-d",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Grid sequence to train on (overrides data.dataset)",
)
@click.option(
    "--loss",
    type=click.Choice(["at", "mae", "mse", "huber", "charbonnier"]),
    default=None,
    help="Overrides train.loss",
)
@click.option("--plots", is_flag=True, help="Write a forecast PNG (needs matplotlib)")
def train(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    dataset: Path | None,
    loss: str | None,
    plots: bool,
) -> None:
    """
    Train the CNN for 1-step forecasting on the clean track.

    \b
    Outputs (in the output directory):
        model.atck    checkpoint
        epochs.csv    per-epoch loss and validation scores
        metrics.csv   scores per threshold and lead time on the eval split
        atloss.log    run log

    \b
    Examples:
        atloss train --loss at --seed 1
        atloss train -c experiment.ini -d refined.atgrid
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)
    attach_run_log(out_dir)
    if dataset is not None:
        cfg = cfg.replace(data=cfg.data.replace(dataset=str(dataset)))

    start_time = time.time()
    with exit_on_error(ExitCode.GENERATION_FAILED):
        frames = load_frames(cfg)
    with exit_on_error(ExitCode.REFINE_FAILED):
        train_set, eval_set = prepare_datasets(cfg, frames)
    log_timing("Data preparation", time.time() - start_time)

    with exit_on_error(ExitCode.CONFIG_ERROR):
        train_config = build_train_config(cfg, loss=loss)

    start_time = time.time()
    with exit_on_error(ExitCode.TRAINING_FAILED):
        try:
            result = train_model(train_config, train_set, eval_set)
        except AtLossError as e:
            raise StageError("train", e) from e
    log_timing("Training", time.time() - start_time)

    scored = eval_set or train_set
    with exit_on_error(ExitCode.GENERAL_ERROR):
        rows = evaluate(
            result.model,
            scored,
            thresholds=tuple(cfg.train.thresholds),
            lead_steps=(1,) if cfg.train.stacked_input else tuple(cfg.train.lead_steps),
            stacked_input=cfg.train.stacked_input,
        )

    with exit_on_error(ExitCode.EXPORT_FAILED):
        export_checkpoint(result.model, out_dir / "model.atck", metadata=result.metadata)
        export_epoch_log(result.log, out_dir / "epochs.csv")
        export_metric_rows(rows, out_dir / "metrics.csv")
        if plots:
            from atloss.exporters.plot_exporter import export_field_plot

            inputs, targets = split_pairs(scored, cfg.train.stacked_input)
            predicted = forecast(result.model, inputs[:1], scored.norm)
            export_field_plot(
                {"input": inputs[0, -1], "observed": targets[0, 0], "forecast": predicted[0, 0]},
                train_config.at.theta,
                out_dir / "forecast.png",
                title=f"{train_config.loss} forecast",
            )

    if result.log:
        print_table("Last epoch", EPOCH_COLUMNS, [epoch_record(result.log[-1])])
    print_table("Evaluation", METRIC_COLUMNS, [metric_row_record(r) for r in rows])
    console.print(f"[green]Outputs written to: {out_dir}[/green]")
