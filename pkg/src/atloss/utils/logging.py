"""Logging utilities: one rich console for reports, RichHandler for log records."""

import logging
from pathlib import Path
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

console = Console()

RUN_LOG_NAME = "atloss.log"

_FILE_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Third-party loggers that flood DEBUG output
_QUIET_LOGGERS = ("matplotlib", "PIL")


def format_duration(seconds: float) -> str:
    """Seconds as MM:SS, or HH:MM:SS from one hour up."""
    hours = int(seconds // 3600)
    minutes = int((seconds % 3600) // 60)
    secs = int(seconds % 60)
    if hours:
        return f"{hours:02d}:{minutes:02d}:{secs:02d}"
    return f"{minutes:02d}:{secs:02d}"


def setup_logging(verbose: bool = False, log_file: Optional[Path] = None) -> None:
    """Configures the root logger with Rich; DEBUG when verbose."""
    level = logging.DEBUG if verbose else logging.INFO

    handlers: list[logging.Handler] = [
        RichHandler(console=console, rich_tracebacks=True, show_path=verbose)
    ]
    if log_file:
        handlers.append(_file_handler(log_file))

    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=handlers,
        force=True,
    )
    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


def attach_run_log(out_dir: Path) -> Path:
    """
    Tees every log record of the current run into out_dir/atloss.log.

    Commands call this once the output directory is known, after setup_logging.
    """
    path = out_dir / RUN_LOG_NAME
    root = logging.getLogger()
    for handler in root.handlers:
        if isinstance(handler, logging.FileHandler) and Path(handler.baseFilename) == path.resolve():
            return path
    root.addHandler(_file_handler(path))
    return path


def _file_handler(path: Path) -> logging.FileHandler:
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter(_FILE_FORMAT))
    return handler


def log_timing(stage: str, duration: float) -> None:
    """Logs timing for a step."""
    console.print(f"[green]✓[/green] {stage}: {duration:.2f}s ({format_duration(duration)})")


def log_verdict(suite: str, failures: int, total: int) -> None:
    """One pass/fail line per verification suite."""
    if failures:
        console.print(f"[red]✗[/red] {suite}: {failures}/{total} out of tolerance")
    else:
        console.print(f"[green]✓[/green] {suite}: {total} passed")
