"""Distances command - Dump k-th influence distances."""

from pathlib import Path

import click

from effector.commands.utils import (
    Context,
    emit,
    graph_options,
    handle_error,
    k_option,
    load_network,
    out_option,
    pass_context,
)
from effector.distance import distance_table
from effector.errors import EffectorError
from effector.output import distance_table_to_csv
from effector.storage import read_node_list


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@graph_options
@k_option
@click.option("--sources", required=True, type=click.Path(dir_okay=False),
              help="Source node file (one id per line)")
@click.option("--targets", type=click.Path(dir_okay=False), default=None,
              help="Target node file (default: every node)")
@out_option
@pass_context
def distances(
    ctx: Context,
    graph: str,
    probability: str | None,
    undirected: bool | None,
    k: int | None,
    sources: str,
    targets: str | None,
    out: str | None,
):
    """
    Write d^k(u, v) for every source u and target v as CSV

    Columns: u,v,k,distance. Pairs without a positive-probability path
    read inf.

    Examples:

        effector distances -g fb.txt --k 3 --sources active.txt -o d3.csv

        effector distances -g g.txt --prob uniform:0.5 --k 1 --sources a.txt --targets b.txt
    """
    try:
        settings = ctx.settings(probability=probability, undirected=undirected, k=k)
        net = load_network(settings, graph)
        source_nodes = read_node_list(Path(sources), net)
        target_nodes = read_node_list(Path(targets), net) if targets else range(net.node_count)
        table = distance_table(net, source_nodes, target_nodes, settings.k)
        emit(distance_table_to_csv(table, net), out)
    except EffectorError as e:
        handle_error(ctx, e)
