import logging
import sys
import traceback
from pathlib import Path
from typing import Optional

import click

from effector.config import EffectorConfig, validate_config
from effector.errors import ConfigError
from effector.graph import ActivationState, IcNetwork
from effector.storage import read_network, read_state, write_text
from effector.utils import parse_probability_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


# ============================================================================
# Context Object
# ============================================================================

class Context:
    """Shared context object for CLI commands."""

    def __init__(self):
        self.config: EffectorConfig = EffectorConfig()
        self.debug: bool = False

    def settings(self, **overrides) -> EffectorConfig:
        """
        Config with explicit CLI values on top.

        Options left unset (None) keep the loaded value.

        Raises:
            ConfigError: If the merged settings are invalid
        """
        merged = EffectorConfig(**vars(self.config))
        for name, value in overrides.items():
            if value is not None:
                setattr(merged, name, value)
        errors = validate_config(merged)
        if errors:
            raise ConfigError("; ".join(errors))
        return merged


pass_context = click.make_pass_decorator(Context, ensure=True)


# ============================================================================
# Error Handling
# ============================================================================

def handle_error(ctx: Context, error: Exception, exit_code: int = EXIT_DATA) -> None:
    """
    Handle errors with appropriate output.

    Args:
        ctx: The CLI context
        error: The exception that occurred
        exit_code: The exit code to use (default: 2, data error)
    """
    if ctx.debug:
        click.echo(traceback.format_exc(), err=True)
    else:
        click.echo(f"Error: {error}", err=True)
    sys.exit(exit_code)


# ============================================================================
# Shared Loading Helpers
# ============================================================================

def load_network(settings: EffectorConfig, graph: str) -> IcNetwork:
    """Read the graph with the configured direction and probability model."""
    model = parse_probability_model(settings.probability)
    net = read_network(Path(graph), settings.undirected, model)
    logger.debug("Network %s with %s probabilities", net, model)
    return net


def load_inputs(settings: EffectorConfig, graph: str, state: str) -> tuple[IcNetwork, ActivationState]:
    net = load_network(settings, graph)
    return net, read_state(Path(state), net)


def emit(text: str, out: Optional[str]) -> None:
    """Write ``text`` to ``out`` under a lock, or to stdout."""
    if out:
        write_text(Path(out), text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text.rstrip("\n"))


# ============================================================================
# Shared Decorators and Options
# ============================================================================

def graph_options(func):
    """Decorator for commands that read a graph."""
    func = click.option(
        "--undirected/--directed", default=None,
        help="Expand every edge-list pair into both directions",
    )(func)
    func = click.option(
        "--prob", "probability", default=None,
        help="Edge probabilities: uniform:P, wc or explicit",
    )(func)
    func = click.option(
        "--graph", "-g", required=True, type=click.Path(dir_okay=False),
        help="Edge-list file",
    )(func)
    return func


def state_option(func):
    """Decorator for commands that read an activation state."""
    return click.option(
        "--state", required=True, type=click.Path(dir_okay=False),
        help="Activation-state file (one active node id per line)",
    )(func)


def out_option(func):
    """Decorator for commands that can write to a file."""
    return click.option(
        "--out", "-o", type=click.Path(dir_okay=False), default=None,
        help="Write output to this file instead of stdout",
    )(func)


def lambda_option(func):
    return click.option(
        "--lambda", "lam", type=float, default=None,
        help="Trade-off between the two distance terms (0..1)",
    )(func)


def k_option(func):
    return click.option(
        "--k", "k", type=int, default=None,
        help="Edge-disjoint paths per influence distance",
    )(func)


def seed_option(func):
    return click.option("--seed", type=int, default=None, help="Master random seed")(func)


def trials_option(func):
    return click.option("--trials", type=int, default=None, help="Monte Carlo trials")(func)

