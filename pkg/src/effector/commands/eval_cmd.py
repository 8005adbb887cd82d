"""Eval command - Estimate effector quality by simulation."""

import json
from pathlib import Path

import click

from effector.commands.utils import (
    Context,
    graph_options,
    handle_error,
    load_inputs,
    pass_context,
    seed_option,
    state_option,
    trials_option,
)
from effector.diffusion import estimate_f1, estimate_f2
from effector.errors import ArgumentError, EffectorError
from effector.output import estimates_to_dict, format_estimates
from effector.storage import read_node_list


@click.command(name="eval")
@click.help_option("-h", "--help", help="Show this message and exit")
@graph_options
@state_option
@click.option("--effectors", "-e", required=True, type=click.Path(dir_okay=False),
              help="Effector file (one node id per line)")
@trials_option
@seed_option
@click.option("--f2/--no-f2", default=True, help="Also estimate f2")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@pass_context
def eval_effectors(
    ctx: Context,
    graph: str,
    probability: str | None,
    undirected: bool | None,
    state: str,
    effectors: str,
    trials: int | None,
    seed: int | None,
    f2: bool,
    as_json: bool,
):
    """
    Estimate f1 (and f2) for an effector set

    f1 is the expected Hamming distance between the observed state and
    a diffusion from the effectors; f2 is the L1 distance between the
    observed state and the expected activation vector.

    Examples:

        effector eval -g fb.txt --state state.txt -e effectors.txt

        effector eval -g fb.txt --state state.txt -e effectors.txt --trials 1000 --seed 4
    """
    try:
        settings = ctx.settings(
            probability=probability, undirected=undirected, trials=trials, seed=seed,
        )
        net, observed = load_inputs(settings, graph, state)
        members = read_node_list(Path(effectors), net)
        outside = [net.label(u) for u in members if not observed.is_active(u)]
        if outside:
            raise ArgumentError(f"Effectors are not active: {', '.join(outside)}")

        estimates = {"f1": estimate_f1(net, observed, members, settings.trials, settings.seed)}
        if f2:
            estimates["f2"] = estimate_f2(net, observed, members, settings.trials, settings.seed)
    except EffectorError as e:
        handle_error(ctx, e)

    if as_json or settings.output_format == "json":
        click.echo(json.dumps(estimates_to_dict(estimates), indent=2))
    else:
        click.echo(format_estimates(estimates))
