"""Consistency command - clean vs dirty tracks for every loss, noise kind and seed."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import config_options, exit_on_error, load_experiment, print_table
from atloss.config import ExitCode
from atloss.core.exceptions import AtLossError, StageError
from atloss.core.experiment import load_frames, prepare_datasets, run_consistency_suite
from atloss.core.trainer import forecast, split_pairs
from atloss.exporters.csv_exporter import export_epoch_log, export_records
from atloss.utils.logging import attach_run_log, console, log_timing, setup_logging

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["loss", "noise_kind", "seeds", "mae_mean", "psnr_mean"]
SEED_COLUMNS = ["loss", "noise_kind", "seed", "mae", "psnr"]


@click.command()
@config_options
@click.option("--plots", is_flag=True, help="Write forecast PNGs (needs matplotlib)")
def consistency(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    plots: bool,
) -> None:
    """
    Train clean and dirty tracks and compare their forecasts (MAE, PSNR).

    Lower cross-track MAE and higher PSNR mean the loss is less sensitive to
    outliers in its training data. --seed only changes the data seed; the
    run seeds come from [consistency] seeds.

    \b
    Outputs (in the output directory):
        consistency.csv        mean MAE/PSNR per loss and noise kind
        consistency_seeds.csv  one row per loss, noise kind and seed
        logs/*.csv             per-epoch logs of every run
        atloss.log             run log
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)
    attach_run_log(out_dir)

    start_time = time.time()
    with exit_on_error(ExitCode.GENERATION_FAILED):
        try:
            frames = load_frames(cfg)
        except AtLossError as e:
            raise StageError("generate", e) from e
    with exit_on_error(ExitCode.REFINE_FAILED):
        train_set, eval_set = prepare_datasets(cfg, frames)
    log_timing("Data preparation", time.time() - start_time)

    start_time = time.time()
    with exit_on_error(ExitCode.TRAINING_FAILED):
        suite = run_consistency_suite(cfg, train_set, eval_set)
    log_timing("Consistency suite", time.time() - start_time)

    summary = suite.summary()
    with exit_on_error(ExitCode.EXPORT_FAILED):
        export_records(summary, out_dir / "consistency.csv", SUMMARY_COLUMNS)
        export_records(
            (vars(r) for r in suite.rows), out_dir / "consistency_seeds.csv", SEED_COLUMNS
        )
        for (loss, track, run_seed), result in suite.logs.items():
            export_epoch_log(result.log, out_dir / "logs" / f"{loss}_{track}_seed{run_seed}.csv")
        if plots or cfg.consistency.plots:
            _export_plots(cfg, suite, eval_set or train_set, out_dir)

    print_table("Cross-track consistency", SUMMARY_COLUMNS, summary)
    losses = cfg.consistency.losses
    if "at" in losses and "mse" in losses:
        for kind in cfg.consistency.noise_kinds:
            won, total = suite.wins("at", "mse", kind)
            console.print(f"[cyan]AT beats MSE on MAE and PSNR ({kind}): {won}/{total} seeds[/cyan]")
    console.print(f"[green]Outputs written to: {out_dir}[/green]")


def _export_plots(cfg, suite, dataset, out_dir: Path) -> None:
    """First eval window: observed target plus clean and dirty forecasts of each loss."""
    from atloss.exporters.plot_exporter import export_field_plot

    inputs, targets = split_pairs(dataset, cfg.train.stacked_input)
    run_seed = cfg.consistency.seeds[0]
    for loss in cfg.consistency.losses:
        for kind in cfg.consistency.noise_kinds:
            fields = {"observed": targets[0, 0]}
            for track in ("clean", kind):
                model = suite.logs[(loss, track, run_seed)].model
                fields[track] = forecast(model, inputs[:1], dataset.norm)[0, 0]
            export_field_plot(
                fields,
                cfg.loss.theta,
                out_dir / "plots" / f"{loss}_{kind}.png",
                title=f"{loss}, {kind}",
            )
