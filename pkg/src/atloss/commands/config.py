"""Config command group - manage experiment configuration files."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import click

from atloss.config import ExitCode
from atloss.core.exceptions import ConfigError
from atloss.core.experiment import parse_config
from atloss.utils.logging import console


TEMPLATES = ("experiment", "acceptance")


def load_template(name: str = "experiment") -> str:
    """Text of a bundled config template."""
    template_path = resources.files("atloss") / "templates" / f"{name}.ini"
    return template_path.read_text(encoding="utf-8")


template_option = click.option(
    "--template",
    "-t",
    "template",
    type=click.Choice(TEMPLATES),
    default="experiment",
    show_default=True,
    help="Bundled template",
)


@click.group()
def config() -> None:
    """Manage experiment configuration files."""


@config.command("show")
@template_option
@click.option("--resolved", is_flag=True, help="Print a validated file instead of the template")
@click.argument(
    "file", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
def show(template: str, resolved: bool, file: Path | None) -> None:
    """Print the commented template, or FILE with every default filled in."""
    if not resolved and file is None:
        click.echo(load_template(template), nl=False)
        return
    text = file.read_text(encoding="utf-8") if file else ""
    try:
        cfg = parse_config(text, source=str(file) if file else "<defaults>")
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise SystemExit(ExitCode.CONFIG_ERROR)
    click.echo(cfg.to_ini(), nl=False)


@config.command("copy")
@click.argument("output", default="experiment.ini", required=False, type=click.Path(path_type=Path))
@click.option("--force", "-f", is_flag=True)
@template_option
def copy(output: Path, force: bool, template: str) -> None:
    """Copy the config template to a file."""
    if output.exists() and not force:
        console.print(f"[red]File already exists: {output} (use --force)[/red]")
        raise SystemExit(ExitCode.INVALID_INPUT)

    output.write_text(load_template(template), encoding="utf-8")
    console.print(f"[green]Template saved to: {output}[/green]")


@config.command("validate")
@click.argument("file", type=click.Path(exists=True, path_type=Path))
def validate(file: Path) -> None:
    """Validate an experiment config file."""
    try:
        parse_config(file.read_text(encoding="utf-8"), source=str(file))
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise SystemExit(ExitCode.CONFIG_ERROR)

    console.print("[green]Config is valid.[/green]")
