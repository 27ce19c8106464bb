"""Generate command - synthesize a precipitation grid sequence."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import config_options, exit_on_error, load_experiment
from atloss.config import ExitCode
from atloss.core.synthetic import generate_frames
from atloss.exporters.grid_exporter import export_grid_csv, export_grid_sequence
from atloss.utils.logging import console, log_timing, setup_logging

logger = logging.getLogger(__name__)


@click.command()
@config_options
@click.option("--csv/--no-csv", "write_csv", default=False, help="Also write sequence.csv")
def generate(
    config_path: Path | None, seed: int | None, out: Path | None, verbose: bool, write_csv: bool
) -> None:
    """
    Synthesize advecting rain cells using the [storm] and [data] sections.

    \b
    Examples:
        atloss generate --seed 3 --out runs/gen
        atloss generate -c experiment.ini --csv
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)
    d = cfg.data

    start_time = time.time()
    with exit_on_error(ExitCode.GENERATION_FAILED):
        frames = generate_frames(d.height, d.width, d.steps, cfg.storm, cfg.run.seed)
    log_timing("Generation", time.time() - start_time)

    with exit_on_error(ExitCode.EXPORT_FAILED):
        grid_path = out_dir / "sequence.atgrid"
        export_grid_sequence(frames, grid_path)
        console.print(f"[green]Output file: {grid_path}[/green]")
        if write_csv:
            csv_path = out_dir / "sequence.csv"
            export_grid_csv(frames, csv_path)
            console.print(f"[green]Output file: {csv_path}[/green]")

    wet = float((frames >= cfg.loss.theta).mean())
    console.print(
        f"[dim]{d.steps} frames of {d.height}x{d.width}, max {frames.max():.2f} mm/h, "
        f"{wet:.1%} of cells >= {cfg.loss.theta:g} mm/h[/dim]"
    )
