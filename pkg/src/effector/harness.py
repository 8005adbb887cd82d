"""
Experiment generation and end-to-end evaluation.

Every random choice of a replication comes from sub-seeds derived from
(master seed, replication index), so replications can run in any order or
in parallel and still produce the same records.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from effector.baselines import out_degree_detect, random_detect
from effector.config import ExperimentConfig
from effector.diffusion import CoinStream, estimate_f1, estimate_f2, simulate_once
from effector.distance import DistanceTable, table_for_state
from effector.errors import ArgumentError, EffectorError
from effector.fbed import fbed
from effector.graph import ActivationState, IcNetwork
from effector.mbed import mbed
from effector.mlbed import mlbed
from effector.models import Algorithm, EffectorResult, Protocol, ResultRecord, SweepRecord
from effector.storage import read_network
from effector.utils import budget_range, derive_seed, make_rng, parse_probability_model

logger = logging.getLogger(__name__)

# Index paths under a replication's sub-seed tree
_STATE_STREAM = 0
_EVAL_STREAM = 1
_DETECTOR_STREAM = 2


# ============================================================================
# State Generation
# ============================================================================

def generate_state_by_seeding(
    net: IcNetwork,
    budget: int,
    rng: np.random.Generator,
) -> tuple[ActivationState, frozenset[int]]:
    """
    Pick ``budget`` uniform seeds and run one diffusion from them.

    Returns:
        The realized state and the true seeds

    Raises:
        ArgumentError: If the budget exceeds N
    """
    if not 0 <= budget <= net.node_count:
        raise ArgumentError(f"Cannot seed {budget} of {net.node_count} nodes")
    seeds = frozenset(int(u) for u in rng.choice(net.node_count, size=budget, replace=False))
    stream = CoinStream(int(rng.integers(0, 2**63)), 0)
    return simulate_once(net, seeds, stream).final_state, seeds


def generate_state_random(net: IcNetwork, n1: int, rng: np.random.Generator) -> ActivationState:
    """
    Activate a uniform random ``n1``-subset of the nodes.

    Raises:
        ArgumentError: If n1 is outside 0..N
    """
    if not 0 <= n1 <= net.node_count:
        raise ArgumentError(f"Cannot activate {n1} of {net.node_count} nodes")
    active = rng.choice(net.node_count, size=n1, replace=False)
    return ActivationState.from_active(net.node_count, (int(u) for u in active))


# ============================================================================
# Detector Registry
# ============================================================================

class TableCache:
    """Distance tables of one state, computed on first use and shared by detectors."""

    def __init__(self, net: IcNetwork, state: ActivationState, workers: int = 1):
        self.net = net
        self.state = state
        self.workers = workers
        self._tables: dict[int, DistanceTable] = {}

    def get(self, k: int) -> DistanceTable:
        if k not in self._tables:
            self._tables[k] = table_for_state(self.net, self.state, k, self.workers)
        return self._tables[k]


Detector = Callable[..., EffectorResult]


def _run_mbed(net, state, budget, lam, k, rng, tables):
    return mbed(net, state, budget, lam, table=tables.get(1))


def _run_fbed(net, state, budget, lam, k, rng, tables):
    return fbed(net, state, budget, lam, k, table=tables.get(k))


def _run_mlbed(net, state, budget, lam, k, rng, tables):
    return mlbed(net, state, budget)


def _run_outdegree(net, state, budget, lam, k, rng, tables):
    return out_degree_detect(net, state, budget)


def _run_random(net, state, budget, lam, k, rng, tables):
    return random_detect(state, budget, rng)


DETECTORS: dict[Algorithm, Detector] = {
    Algorithm.MBED: _run_mbed,
    Algorithm.FBED: _run_fbed,
    Algorithm.MLBED: _run_mlbed,
    Algorithm.OUTDEGREE: _run_outdegree,
    Algorithm.RANDOM: _run_random,
}


def run_detector(
    algorithm: Algorithm,
    net: IcNetwork,
    state: ActivationState,
    budget: int,
    lam: float = 0.5,
    k: int = 3,
    rng: Optional[np.random.Generator] = None,
    tables: Optional[TableCache] = None,
) -> EffectorResult:
    """
    Run one detector by tag.

    Args:
        algorithm: Detector tag
        net: The network
        state: Observed activation state
        budget: Number of effectors
        lam: Trade-off for MBED and FBED
        k: Path count for FBED
        rng: Generator for the random baseline (default: seed 0)
        tables: Shared distance tables (default: a fresh cache)
    """
    state.check_network(net)
    tables = tables or TableCache(net, state)
    rng = rng if rng is not None else np.random.default_rng(0)
    return DETECTORS[Algorithm(algorithm)](net, state, budget, lam, k, rng, tables)


# ============================================================================
# Experiments
# ============================================================================

def load_experiment_network(exp: ExperimentConfig) -> IcNetwork:
    """Read the experiment graph and apply its probability model."""
    return read_network(exp.graph, exp.undirected, parse_probability_model(exp.probability))


def _generate(exp: ExperimentConfig, net: IcNetwork, rng: np.random.Generator) -> tuple[ActivationState, int]:
    if exp.protocol == Protocol.SEEDED:
        state, _ = generate_state_by_seeding(net, min(exp.size, net.node_count), rng)
        return state, exp.size
    state = generate_state_random(net, min(exp.size, net.node_count), rng)
    if state.n1 == 0:
        return state, 0
    low, high = budget_range(state.n1)
    return state, int(rng.integers(low, high + 1))


def _evaluation_seed(exp: ExperimentConfig, replication: int, position: int) -> int:
    if exp.common_random_numbers:
        return derive_seed(exp.seed, replication, _EVAL_STREAM)
    return derive_seed(exp.seed, replication, _EVAL_STREAM, position)


def run_replication(
    exp: ExperimentConfig,
    net: IcNetwork,
    replication: int,
    table_workers: int = 1,
) -> list[ResultRecord]:
    """
    Generate one state and evaluate every configured detector on it.

    Detector failures become skipped records; the run continues.
    ``table_workers`` splits distance-table rows over processes.
    """
    state, budget = _generate(exp, net, make_rng(exp.seed, replication, _STATE_STREAM))
    tables = TableCache(net, state, table_workers)
    records = []

    for position, algorithm in enumerate(exp.algorithms):
        record = ResultRecord(replication=replication, n1=state.n1, budget=budget, algorithm=algorithm)
        records.append(record)
        if not 1 <= budget <= state.n1:
            record.skipped = True
            record.reason = f"budget {budget} not in 1..{state.n1}"
            logger.warning("Replication %d: skipping %s (%s)", replication, algorithm.value, record.reason)
            continue

        rng = make_rng(exp.seed, replication, _DETECTOR_STREAM, position)
        started = time.perf_counter()
        try:
            result = run_detector(algorithm, net, state, budget, exp.lam, exp.k, rng, tables)
        except EffectorError as e:
            record.skipped = True
            record.reason = str(e)
            logger.warning("Replication %d: %s failed: %s", replication, algorithm.value, e)
            continue
        elapsed = (time.perf_counter() - started) * 1000.0

        eval_seed = _evaluation_seed(exp, replication, position)
        f1 = estimate_f1(net, state, result.members, exp.trials, eval_seed)
        record.f1_mean, record.f1_stderr = f1.mean, f1.stderr
        record.score = result.score
        record.wall_ms = elapsed if exp.timing else 0.0
        if exp.f2:
            f2 = estimate_f2(net, state, result.members, exp.trials, eval_seed)
            record.f2_mean, record.f2_stderr = f2.mean, f2.stderr

    return records


def _replication_worker(args: tuple[ExperimentConfig, IcNetwork, int]) -> list[ResultRecord]:
    exp, net, replication = args
    return run_replication(exp, net, replication)


def run_experiment(exp: ExperimentConfig, net: Optional[IcNetwork] = None) -> list[ResultRecord]:
    """
    Run every replication of an experiment.

    Args:
        exp: Experiment configuration
        net: Network to use (default: load ``exp.graph``)

    Returns:
        Records ordered by replication, then by the configured detector order
    """
    if net is None:
        net = load_experiment_network(exp)
    logger.debug(
        "Experiment: %s protocol, size %d, %d replication(s), %d worker(s)",
        exp.protocol.value, exp.size, exp.replications, exp.workers,
    )

    jobs = [(exp, net, replication) for replication in range(exp.replications)]
    if exp.workers > 1 and exp.replications > 1:
        with ProcessPoolExecutor(max_workers=exp.workers) as pool:
            batches = list(pool.map(_replication_worker, jobs))
    else:
        batches = [run_replication(exp, net, replication, exp.workers) for replication in range(exp.replications)]
    return [record for batch in batches for record in batch]


# ============================================================================
# Lambda Sweep
# ============================================================================

def run_lambda_sweep(
    net: IcNetwork,
    state: ActivationState,
    grid: Sequence[float],
    budget: int = 1,
    trials: int = 10000,
    seed: int = 0,
    algorithms: Iterable[Algorithm] = (Algorithm.MBED, Algorithm.RANDOM),
    k: int = 3,
) -> list[SweepRecord]:
    """
    Evaluate detectors on one fixed state for every lambda in ``grid``.

    All rows share one set of coin streams, so differences between rows
    come from the detectors alone.
    """
    tables = TableCache(net, state)
    eval_seed = derive_seed(seed, _EVAL_STREAM)
    algorithms = [Algorithm(a) for a in algorithms]
    records = []
    for step, lam in enumerate(grid):
        for position, algorithm in enumerate(algorithms):
            rng = make_rng(seed, _DETECTOR_STREAM, step, position)
            result = run_detector(algorithm, net, state, budget, lam, k, rng, tables)
            f1 = estimate_f1(net, state, result.members, trials, eval_seed)
            records.append(SweepRecord(lam, algorithm, f1.mean, f1.stderr, result.score))
        logger.debug("Sweep lambda=%.2f done", lam)
    return records
