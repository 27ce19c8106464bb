"""Gradcheck command - finite-difference checks of every analytic gradient."""

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
from atloss.core.gradcheck import GradCase, run_gradcheck
from atloss.utils.logging import console, log_timing, setup_logging

logger = logging.getLogger(__name__)

GRADCHECK_COLUMNS = ["suite", "case", "name", "max_rel_error", "tolerance", "passed"]


def run_gradcheck_suite(cfg: ExperimentConfig, out_dir: Path, report_format: str) -> list[GradCase]:
    """Runs the checks, writes the report, prints a per-suite summary."""
    g = cfg.gradcheck
    start_time = time.time()
    cases = run_gradcheck(
        cases=g.cases,
        step=g.step,
        tolerance=g.tolerance,
        layer_step=g.layer_step,
        layer_tolerance=g.layer_tolerance,
        floor=g.floor,
        seed=cfg.run.seed,
    )
    log_timing("Gradient check", time.time() - start_time)

    path = write_report(
        (c.to_record() for c in cases),
        out_dir,
        "gradcheck",
        report_format,
        GRADCHECK_COLUMNS,
        metadata={"seed": cfg.run.seed, "gradcheck": g.model_dump()},
    )
    summary = []
    for suite in dict.fromkeys(c.suite for c in cases):
        group = [c for c in cases if c.suite == suite]
        summary.append(
            {
                "suite": suite,
                "cases": len(group),
                "failed": sum(not c.passed for c in group),
                "max_rel_error": max(c.max_rel_error for c in group),
            }
        )
    print_table("Gradient check", ["suite", "cases", "failed", "max_rel_error"], summary)
    console.print(f"[green]Output file: {path}[/green]")
    return cases


@click.command()
@config_options
@format_option
def gradcheck(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    report_format: str | None,
) -> None:
    """
    Compare analytic gradients with central finite differences.

    Covers the AT loss, the baselines, and every network layer.
    Exits with a verification failure code if any case exceeds its tolerance.
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)

    with exit_on_error(ExitCode.VERIFICATION_FAILED):
        cases = run_gradcheck_suite(cfg, out_dir, report_format or cfg.run.format)
        failed = [c for c in cases if not c.passed]
        if failed:
            raise VerificationFailure(
                f"{len(failed)} gradient case(s) exceeded tolerance",
                [f"{c.suite}#{c.case} {c.name}: {c.max_rel_error:.3e}" for c in failed],
            )
    console.print("[green]✓ All gradient checks passed[/green]")
