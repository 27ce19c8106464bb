"""Lipschitz command - empirical gradient sweep against 16 / (27 tau)."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import (
    config_options,
    exit_on_error,
    format_option,
    load_experiment,
    print_table,
    write_report,
)
from atloss.config import ExitCode
from atloss.core.exceptions import VerificationFailure
from atloss.core.experiment import ExperimentConfig
from atloss.core.lipschitz import LipschitzRow, sweep
from atloss.utils.logging import console, log_timing, setup_logging

logger = logging.getLogger(__name__)

LIPSCHITZ_COLUMNS = [
    "tau",
    "analytic",
    "empirical_dry",
    "empirical_wet",
    "zeta_dry",
    "zeta_wet",
    "within_bound",
    "extremum_ok",
    "below_one",
    "passed",
]


def run_lipschitz_suite(
    cfg: ExperimentConfig, out_dir: Path, report_format: str
) -> list[LipschitzRow]:
    lc = cfg.lipschitz
    start_time = time.time()
    rows = sweep(lc.taus, lc.grid_points, lc.theta, lc.tolerance, lc.extremum_tolerance)
    log_timing("Lipschitz sweep", time.time() - start_time)

    records = [r.to_record() for r in rows]
    path = write_report(
        records, out_dir, "lipschitz", report_format, LIPSCHITZ_COLUMNS,
        metadata={"lipschitz": lc.model_dump()},
    )
    print_table(
        "Lipschitz sweep",
        ["tau", "analytic", "empirical_dry", "empirical_wet", "below_one", "passed"],
        records,
    )
    console.print(f"[green]Output file: {path}[/green]")
    return rows


@click.command()
@config_options
@format_option
def lipschitz(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    report_format: str | None,
) -> None:
    """
    Sweep sup |dL/dy| over a dense grid for each tau in [lipschitz] taus.

    Fails if the empirical maximum exceeds 16 / (27 tau), misses the
    analytic extremum, or the bound reaches 1 for tau in [0.6, 1].
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)

    with exit_on_error(ExitCode.VERIFICATION_FAILED):
        rows = run_lipschitz_suite(cfg, out_dir, report_format or cfg.run.format)
        failed = [r for r in rows if not r.passed]
        if failed:
            raise VerificationFailure(
                f"{len(failed)} tau value(s) failed the Lipschitz check",
                [f"tau={r.tau}: {r.to_record()}" for r in failed],
            )
    console.print("[green]✓ Lipschitz bound holds[/green]")
