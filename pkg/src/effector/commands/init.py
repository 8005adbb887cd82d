"""Init command - Write configuration and experiment templates."""

from pathlib import Path

import click

from effector.commands.utils import EXIT_DATA, Context, pass_context
from effector.config import write_default_config, write_experiment_template
from effector.utils import PROJECT_CONFIG_NAME


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@click.option("--experiment", "experiment_file", type=click.Path(dir_okay=False), default=None,
              help="Also write an experiment template to this file")
@click.option("--force", is_flag=True, help="Overwrite existing files")
@click.argument("path", required=False, type=click.Path(file_okay=False))
@pass_context
def init(ctx: Context, experiment_file: str | None, force: bool, path: str | None):
    """
    Write a .effector.yaml with the default settings

    Examples:

        effector init                          # In the current directory

        effector init ./study                  # In a specific directory

        effector init --experiment exp.yaml    # Plus an experiment template
    """
    target = Path(path) if path else Path.cwd()
    config_path = target / PROJECT_CONFIG_NAME
    experiment_path = Path(experiment_file) if experiment_file else None

    for existing in (config_path, experiment_path):
        if existing is not None and existing.exists() and not force:
            click.echo(f"Error: {existing} already exists", err=True)
            click.echo("Use --force to overwrite", err=True)
            raise SystemExit(EXIT_DATA)

    write_default_config(config_path)
    click.echo(f"Wrote {config_path}")
    if experiment_path is not None:
        write_experiment_template(experiment_path)
        click.echo(f"Wrote {experiment_path}")
