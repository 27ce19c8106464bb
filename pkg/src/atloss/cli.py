"""CLI entry point using Click."""

import click

from atloss import __version__
from atloss.commands.config import config
from atloss.commands.consistency import consistency
from atloss.commands.generate import generate
from atloss.commands.gradcheck import gradcheck
from atloss.commands.lipschitz import lipschitz
from atloss.commands.penalty_oracle import penalty_oracle
from atloss.commands.refine import refine
from atloss.commands.train import train
from atloss.commands.verify import verify


@click.group()
@click.version_option(version=__version__, prog_name="atloss")
def main() -> None:
    """atloss - threshold-aware training loss: verification and experiments."""
    pass


# Register commands
main.add_command(config)
main.add_command(generate)
main.add_command(refine)
main.add_command(gradcheck)
main.add_command(lipschitz)
main.add_command(penalty_oracle)
main.add_command(train)
main.add_command(consistency)
main.add_command(verify)


@main.command()
def version() -> None:
    """Shows atloss version."""
    click.echo(f"atloss {__version__}")


if __name__ == "__main__":
    main()
