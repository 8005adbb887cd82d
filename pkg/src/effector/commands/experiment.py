"""Experiment commands - Batch evaluation and lambda sweeps."""

from pathlib import Path

import click

from effector.commands.utils import (
    Context,
    emit,
    graph_options,
    handle_error,
    k_option,
    load_inputs,
    out_option,
    pass_context,
    seed_option,
    state_option,
    trials_option,
)
from effector.config import load_experiment_config
from effector.errors import EffectorError
from effector.harness import run_experiment, run_lambda_sweep
from effector.models import Algorithm
from effector.output import records_to_csv, sweep_to_csv
from effector.utils import DEFAULT_LAMBDA_GRID, parse_lambda_grid


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@click.option("--config", "-c", "config_path", required=True, type=click.Path(dir_okay=False),
              help="Experiment YAML file")
@out_option
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Parallel replications (overrides the file)")
@pass_context
def experiment(ctx: Context, config_path: str, out: str | None, workers: int | None):
    """
    Run a batch experiment and write result records as CSV

    Columns: replication,n1,budget,algorithm,f1_mean,f1_stderr,score,wall_ms
    (plus f2_mean,f2_stderr when the file sets f2: true).

    Examples:

        effector experiment -c seeded.yaml -o results.csv

        effector experiment -c random.yaml --workers 4 -o results.csv
    """
    try:
        exp = load_experiment_config(Path(config_path), ctx.config)
        if workers is not None:
            exp.workers = workers
        records = run_experiment(exp)
        emit(records_to_csv(records, f2=exp.f2), out)
    except EffectorError as e:
        handle_error(ctx, e)

    if out:
        skipped = sum(1 for r in records if r.skipped)
        click.echo(f"Wrote {len(records)} record(s) to {out}" + (f" ({skipped} skipped)" if skipped else ""))


@click.command()
@click.help_option("-h", "--help", help="Show this message and exit")
@graph_options
@state_option
@click.option("--budget", "-b", type=int, default=1, show_default=True, help="Number of effectors B")
@click.option("--grid", default=DEFAULT_LAMBDA_GRID, show_default=True,
              help="Lambda grid: start:stop:step or a comma-separated list")
@click.option("--algo", "algorithms", multiple=True,
              type=click.Choice([a.value for a in Algorithm]),
              help="Detector to compare (repeatable, default: mbed and random)")
@k_option
@trials_option
@seed_option
@out_option
@pass_context
def sweep(
    ctx: Context,
    graph: str,
    probability: str | None,
    undirected: bool | None,
    state: str,
    budget: int,
    grid: str,
    algorithms: tuple[str, ...],
    k: int | None,
    trials: int | None,
    seed: int | None,
    out: str | None,
):
    """
    Evaluate detectors on one state across a lambda grid

    Writes lambda,algorithm,f1_mean,f1_stderr,score rows.

    Examples:

        effector sweep -g fb.txt --undirected --state state.txt

        effector sweep -g fb.txt --state s.txt --grid 0.1,0.5,0.9 --algo mbed --algo fbed
    """
    try:
        settings = ctx.settings(
            probability=probability, undirected=undirected, k=k, trials=trials, seed=seed,
        )
        lambdas = parse_lambda_grid(grid)
        net, observed = load_inputs(settings, graph, state)
        records = run_lambda_sweep(
            net, observed, lambdas,
            budget=budget,
            trials=settings.trials,
            seed=settings.seed,
            algorithms=[Algorithm(a) for a in algorithms] or (Algorithm.MBED, Algorithm.RANDOM),
            k=settings.k,
        )
        emit(sweep_to_csv(records), out)
    except EffectorError as e:
        handle_error(ctx, e)
