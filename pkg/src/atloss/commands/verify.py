"""Verify command - gradcheck, Lipschitz sweep and penalty oracle in one run."""

import logging
import time
from pathlib import Path

import click

from atloss.commands.common import config_options, exit_on_error, format_option, load_experiment
from atloss.commands.gradcheck import run_gradcheck_suite
from atloss.commands.lipschitz import run_lipschitz_suite
from atloss.commands.penalty_oracle import run_oracle_suite
from atloss.config import ExitCode
from atloss.core.exceptions import VerificationFailure
from atloss.utils.logging import console, log_timing, log_verdict, setup_logging

logger = logging.getLogger(__name__)


@click.command()
@config_options
@format_option
def verify(
    config_path: Path | None,
    seed: int | None,
    out: Path | None,
    verbose: bool,
    report_format: str | None,
) -> None:
    """
    Run every verification suite; all reports are written before failing.

    \b
    Examples:
        atloss verify
        atloss verify -c ci.ini --format json
    """
    setup_logging(verbose=verbose)
    cfg, out_dir = load_experiment(config_path, seed, out)
    fmt = report_format or cfg.run.format

    start_time = time.time()
    with exit_on_error(ExitCode.VERIFICATION_FAILED):
        cases = run_gradcheck_suite(cfg, out_dir, fmt)
        rows = run_lipschitz_suite(cfg, out_dir, fmt)
        report = run_oracle_suite(cfg, out_dir, fmt)

        failures = [f"gradcheck {c.suite}#{c.case} {c.name}" for c in cases if not c.passed]
        log_verdict("Gradient check", len(failures), len(cases))
        lipschitz_failures = [f"lipschitz tau={r.tau}" for r in rows if not r.passed]
        log_verdict("Lipschitz sweep", len(lipschitz_failures), len(rows))
        failures += lipschitz_failures
        log_verdict("Penalty oracle", int(not report.passed), 1)
        if not report.passed:
            failures.append(f"penalty oracle: {report.counterexample}")
        if failures:
            raise VerificationFailure(f"{len(failures)} verification failure(s)", failures)

    log_timing("Verification", time.time() - start_time)
    console.print("[green]✓ All verification suites passed[/green]")
