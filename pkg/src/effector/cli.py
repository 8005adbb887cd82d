"""Effector CLI - Main entry point and command structure."""

import logging
import sys

import click

from effector import __version__
from effector.commands.utils import EXIT_USAGE, Context, handle_error, pass_context
from effector.config import load_config
from effector.errors import ConfigError


class EffectorGroup(click.Group):
    """Group that reports usage errors with exit code 1 instead of click's 2."""

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.UsageError as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)


# ============================================================================
# Main CLI Group
# ============================================================================

@click.group(cls=EffectorGroup)
@click.version_option(version=__version__, help="Show the effector version and exit")
@click.help_option("-h", "--help", help="Show this message and exit")
@click.option("--debug", is_flag=True, help="Enable debug output")
@pass_context
def main(ctx: Context, debug: bool):
    """Effector - Find the nodes that started an independent-cascade diffusion"""
    ctx.debug = debug
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )

    try:
        ctx.config = load_config()
    except ConfigError as e:
        handle_error(ctx, e)


# ============================================================================
# Command Registration
# ============================================================================

from effector.commands import (  # noqa: E402
    detect,
    distances,
    eval_cmd,
    experiment,
    init,
)

main.add_command(init.init)

# Register detection commands
main.add_command(detect.detect)
main.add_command(detect.extract)

# Register evaluation commands
main.add_command(eval_cmd.eval_effectors)
main.add_command(experiment.experiment)
main.add_command(experiment.sweep)

# Register distance dump
main.add_command(distances.distances)


if __name__ == "__main__":
    main()
