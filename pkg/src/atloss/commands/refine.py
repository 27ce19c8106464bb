"""Refine command - Tukey-fence outlier removal on a grid sequence."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import exit_on_error
from atloss.config import DEFAULT_TUKEY_K, DEFAULT_WET_MIN_VALUE, ExitCode
from atloss.core.refine import refine_sequence
from atloss.exporters.grid_exporter import export_grid_sequence
from atloss.parsers.grid_parser import read_grid_sequence
from atloss.utils.logging import console, log_timing, setup_logging

logger = logging.getLogger(__name__)


@click.command()
@click.argument("input", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Output grid file (default: <input>_refined.atgrid)",
)
@click.option("--k", "k", type=float, default=DEFAULT_TUKEY_K, show_default=True, help="Fence multiplier")
@click.option(
    "--wet-only/--all-cells",
    default=True,
    help="Compute quartiles over cells above --min-value only",
)
@click.option("--min-value", type=float, default=DEFAULT_WET_MIN_VALUE, show_default=True)
@click.option("--verbose", "-v", is_flag=True, help="Verbose mode")
def refine(
    input: Path, output: Path | None, k: float, wet_only: bool, min_value: float, verbose: bool
) -> None:
    """
    Replace Tukey outliers in every frame by their neighborhood mean.

    \b
    Examples:
        atloss refine atloss-out/sequence.atgrid
        atloss refine sequence.atgrid --all-cells -o refined.atgrid
    """
    setup_logging(verbose=verbose)

    if output is None:
        output = input.with_name(f"{input.stem}_refined.atgrid")

    console.print("[cyan]Refining grid sequence...[/cyan]")
    console.print(f"[dim]Input: {input}[/dim]")
    console.print(f"[dim]Output: {output}[/dim]")

    start_time = time.time()
    with exit_on_error(ExitCode.INVALID_INPUT):
        frames = read_grid_sequence(input)
    with exit_on_error(ExitCode.REFINE_FAILED):
        refined, replaced = refine_sequence(frames, k=k, wet_only=wet_only, min_value=min_value)
    with exit_on_error(ExitCode.EXPORT_FAILED):
        export_grid_sequence(refined, output)

    log_timing("Refinement", time.time() - start_time)
    console.print(f"[green]Replaced {replaced} of {frames.size} cells[/green]")
    console.print(f"[green]Output file: {output}[/green]")
