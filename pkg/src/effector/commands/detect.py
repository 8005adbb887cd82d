"""Detect commands - Select effectors and inspect extracted DAGs."""

import click

from effector.commands.utils import (
    Context,
    emit,
    graph_options,
    handle_error,
    k_option,
    lambda_option,
    load_inputs,
    out_option,
    pass_context,
    seed_option,
    state_option,
)
from effector.errors import EffectorError
from effector.harness import run_detector
from effector.mlbed import extract_dags, mlbed
from effector.models import Algorithm
from effector.output import format_dags, format_result, format_result_json
from effector.utils import make_rng


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@graph_options
@state_option
@click.option("--algo", "algorithm", required=True,
              type=click.Choice([a.value for a in Algorithm]),
              help="Detector to run")
@click.option("--budget", "-b", required=True, type=int, help="Number of effectors B")
@lambda_option
@k_option
@seed_option
@click.option("--order-seed", type=int, default=None,
              help="Random node order for MLBED's DAG extraction (default: node-id order)")
@click.option("--json", "as_json", is_flag=True, help="Output as JSON")
@pass_context
def detect(
    ctx: Context,
    graph: str,
    probability: str | None,
    undirected: bool | None,
    state: str,
    algorithm: str,
    budget: int,
    lam: float | None,
    k: int | None,
    seed: int | None,
    order_seed: int | None,
    as_json: bool,
):
    """
    Select B effectors that explain an activation state

    Examples:

        effector detect -g fb.txt --undirected --state state.txt --algo mbed -b 5

        effector detect -g fb.txt --state state.txt --algo fbed -b 5 --k 3 --json

        effector detect -g g.txt --prob uniform:0.01 --state s.txt --algo random -b 2 --seed 7
    """
    try:
        settings = ctx.settings(
            probability=probability, undirected=undirected, lam=lam, k=k, seed=seed,
        )
        net, observed = load_inputs(settings, graph, state)
        algo = Algorithm(algorithm)
        if algo == Algorithm.MLBED:
            result = mlbed(net, observed, budget, order_seed=order_seed)
        else:
            result = run_detector(
                algo, net, observed, budget, settings.lam, settings.k, make_rng(settings.seed),
            )
    except EffectorError as e:
        handle_error(ctx, e)

    if as_json or settings.output_format == "json":
        click.echo(format_result_json(result, net))
    else:
        click.echo(format_result(result, net))


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@graph_options
@state_option
@click.option("--order-seed", type=int, default=None,
              help="Random node order (default: node-id order)")
@out_option
@pass_context
def extract(
    ctx: Context,
    graph: str,
    probability: str | None,
    undirected: bool | None,
    state: str,
    order_seed: int | None,
    out: str | None,
):
    """
    Dump the DAGs extracted from the active subgraph

    Writes one edge-list block per weakly connected component of the
    active nodes, with the probability of every kept edge.

    Examples:

        effector extract -g fb.txt --state state.txt

        effector extract -g fb.txt --state state.txt --order-seed 3 -o dag.txt
    """
    try:
        settings = ctx.settings(probability=probability, undirected=undirected)
        net, observed = load_inputs(settings, graph, state)
        emit(format_dags(net, extract_dags(net, observed, order_seed)), out)
    except EffectorError as e:
        handle_error(ctx, e)
