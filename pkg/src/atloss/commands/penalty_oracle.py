"""Penalty-oracle command - exhaustive QUBO enumeration."""

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
from atloss.core.penalty_oracle import OracleReport, run_penalty_oracle
from atloss.utils.logging import console, log_timing, setup_logging

logger = logging.getLogger(__name__)

ORACLE_COLUMNS = [
    "k",
    "assignments",
    "min_penalty",
    "argmin_unique",
    "argmin_matches",
    "penalty_matches_xor",
    "penalty_matches_table",
    "ranking_consistent",
    "max_limit_error",
    "counterexample",
    "passed",
]


def run_oracle_suite(
    cfg: ExperimentConfig, out_dir: Path, report_format: str, k: int | None = None
) -> OracleReport:
    o = cfg.oracle
    start_time = time.time()
    report = run_penalty_oracle(
        k=k if k is not None else o.k,
        seed=cfg.run.seed,
        theta=o.theta,
        tau=o.tau,
        margin=o.margin,
    )
    log_timing("Penalty oracle", time.time() - start_time)

    record = report.to_record()
    path = write_report(
        [record], out_dir, "penalty_oracle", report_format, ORACLE_COLUMNS,
        metadata={"seed": cfg.run.seed, "oracle": o.model_dump(), "groups": report.groups},
    )
    print_table(
        f"Penalty oracle (k={report.k})",
        ["assignments", "min_penalty", "argmin_matches", "ranking_consistent", "passed"],
        [record],
    )
    console.print(f"[green]Output file: {path}[/green]")
    return report


@click.command("penalty-oracle")
@config_options
@format_option
@click.option("--k", "k", type=int, default=None, help="Cells to enumerate (overrides oracle.k, max 20)")
def penalty_oracle(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    report_format: str | None,
    k: int | None,
) -> None:
    """
    Enumerate all 2^k forecast patterns for a random observation.

    Checks that the penalty is zero only at the observed pattern, equals the
    XOR count and misses + false alarms, and that the sharp AT loss ranks
    patterns exactly as the penalty does.
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)

    with exit_on_error(ExitCode.VERIFICATION_FAILED):
        report = run_oracle_suite(cfg, out_dir, report_format or cfg.run.format, k)
        if not report.passed:
            raise VerificationFailure(
                "penalty oracle found an inconsistency", [report.counterexample or str(report)]
            )
    console.print("[green]✓ Penalty and loss rankings agree[/green]")
