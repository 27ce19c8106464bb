"""Options, error mapping, and report helpers shared by the commands."""

from __future__ import annotations

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence

import click
from rich.table import Table

from atloss.config import ExitCode, get_output_dir
from atloss.core.exceptions import (
    AtLossError,
    ConfigError,
    DimensionError,
    InvalidInputError,
    InvalidParameterError,
    NonFiniteLossError,
    OracleSizeError,
    StageError,
    VerificationFailure,
)
from atloss.core.experiment import ExperimentConfig, load_config
from atloss.exporters.csv_exporter import export_records, format_cell
from atloss.exporters.json_exporter import export_json
from atloss.utils.logging import console

logger = logging.getLogger(__name__)

_STAGE_CODES = {
    "generate": ExitCode.GENERATION_FAILED,
    "refine": ExitCode.REFINE_FAILED,
    "train": ExitCode.TRAINING_FAILED,
    "export": ExitCode.EXPORT_FAILED,
}


def config_options(func: Callable) -> Callable:
    """--config, --seed, --out and --verbose."""
    func = click.option("--verbose", "-v", is_flag=True, help="Verbose mode")(func)
    func = click.option(
        "--out",
        "-o",
        type=click.Path(file_okay=False, path_type=Path),
        default=None,
        help="Output directory (default: $ATLOSS_OUTPUT_DIR or ./atloss-out)",
    )(func)
    func = click.option("--seed", type=int, default=None, help="Overrides run.seed")(func)
    func = click.option(
        "--config",
        "-c",
        "config_path",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        default=None,
        help="Experiment INI file (default: built-in defaults)",
    )(func)
    return func


def format_option(func: Callable) -> Callable:
    return click.option(
        "--format",
        "-f",
        "report_format",
        type=click.Choice(["csv", "json"]),
        default=None,
        help="Report format (default: run.format)",
    )(func)


def exit_code_for(error: BaseException, default: ExitCode) -> ExitCode:
    """ExitCode for an error raised while a command runs."""
    if isinstance(error, StageError):
        for prefix, code in _STAGE_CODES.items():
            if error.stage.startswith(prefix):
                return code
        return exit_code_for(error.cause, default)
    if isinstance(error, ConfigError):
        return ExitCode.CONFIG_ERROR
    if isinstance(error, VerificationFailure):
        return ExitCode.VERIFICATION_FAILED
    if isinstance(error, NonFiniteLossError):
        return ExitCode.TRAINING_FAILED
    if isinstance(error, (InvalidInputError, InvalidParameterError, DimensionError, OracleSizeError)):
        return ExitCode.INVALID_INPUT
    return default


@contextmanager
def exit_on_error(default: ExitCode = ExitCode.GENERAL_ERROR) -> Iterator[None]:
    """Prints the error and exits with its mapped code."""
    try:
        yield
    except (SystemExit, click.exceptions.Exit, click.Abort):
        raise
    except AtLossError as e:
        console.print(f"[red]Error: {e}[/red]")
        if isinstance(e, VerificationFailure):
            for case in e.cases[:20]:
                console.print(f"[red]  {case}[/red]")
        raise SystemExit(exit_code_for(e, default))
    except OSError as e:
        logger.exception("I/O error")
        console.print(f"[red]Error: {e}[/red]")
        raise SystemExit(ExitCode.EXPORT_FAILED)
    except Exception as e:
        logger.exception("Unexpected error")
        console.print(f"[red]Error: {e}[/red]")
        raise SystemExit(ExitCode.GENERAL_ERROR)


def load_experiment(
    config_path: Path | None, seed: int | None, out: Path | None
) -> tuple[ExperimentConfig, Path]:
    """Config with CLI overrides applied, and the resolved output directory."""
    with exit_on_error(ExitCode.CONFIG_ERROR):
        cfg = load_config(config_path).with_overrides(seed=seed, out_dir=out)
        out_dir = get_output_dir(Path(cfg.run.out_dir) if cfg.run.out_dir else None)
    logger.debug(f"Output directory: {out_dir}")
    return cfg, out_dir


def write_report(
    records: Iterable[dict],
    out_dir: Path,
    stem: str,
    report_format: str,
    columns: Sequence[str],
    metadata: dict | None = None,
) -> Path:
    """Writes stem.csv or stem.json under out_dir and returns the path."""
    path = out_dir / f"{stem}.{report_format}"
    if report_format == "json":
        export_json(records, path, metadata=metadata)
    else:
        export_records(records, path, columns)
    return path


def print_table(title: str, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    table = Table(title=title)
    for column in columns:
        table.add_column(column)
    for row in rows:
        table.add_row(*(_short(row.get(c)) for c in columns))
    console.print(table)


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return format_cell(value)
