"""Tests for state generation, the detector registry and experiment runs."""

from pathlib import Path

import numpy as np
import pytest

from effector.config import ExperimentConfig
from effector.errors import ArgumentError
from effector.graph import ActivationState, IcNetwork, ProbabilityModel, assign_probabilities
from effector.harness import (
    TableCache,
    _evaluation_seed,
    generate_state_by_seeding,
    generate_state_random,
    load_experiment_network,
    run_detector,
    run_experiment,
    run_lambda_sweep,
)
from effector.models import Algorithm, Protocol


def experiment(**overrides) -> ExperimentConfig:
    values = dict(
        graph=Path("unused.txt"),
        protocol=Protocol.SEEDED,
        size=1,
        trials=200,
        seed=4,
        replications=3,
        timing=False,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


# ============================================================================
# State Generation Tests
# ============================================================================

def test_seeding_keeps_seeds_active(star_network):
    """Test that the true seeds are part of the realized state."""
    rng = np.random.default_rng(1)
    for _ in range(20):
        state, seeds = generate_state_by_seeding(star_network, 2, rng)

        assert len(seeds) == 2
        assert seeds <= set(state.active)


def test_seeding_is_reproducible(star_network):
    """Test that equal generators give equal states."""
    first = generate_state_by_seeding(star_network, 1, np.random.default_rng(3))
    second = generate_state_by_seeding(star_network, 1, np.random.default_rng(3))

    assert first == second


def test_seeding_certain_edges(make_network):
    """Test that probability-1 edges carry a seed through the whole chain."""
    net = make_network(3, {(0, 1): 1.0, (1, 2): 1.0})
    for seed in range(10):
        state, seeds = generate_state_by_seeding(net, 1, np.random.default_rng(seed))
        assert state.active == tuple(range(min(seeds), 3))


def test_seeding_rejects_oversized_budget(star_network):
    """Test that more seeds than nodes is an argument error."""
    with pytest.raises(ArgumentError):
        generate_state_by_seeding(star_network, 6, np.random.default_rng(0))


def test_random_state_size(star_network):
    """Test that the random protocol activates exactly n1 nodes."""
    state = generate_state_random(star_network, 3, np.random.default_rng(0))

    assert state.n1 == 3
    assert state.node_count == 5


def test_random_state_rejects_bad_size(star_network):
    """Test that n1 must be in 0..N."""
    with pytest.raises(ArgumentError):
        generate_state_random(star_network, 6, np.random.default_rng(0))


# ============================================================================
# Detector Registry Tests
# ============================================================================

def test_table_cache_reuses_tables(star_network):
    """Test that a table is computed once per k."""
    cache = TableCache(star_network, ActivationState([1, 1, 1, 1, 0]))

    assert cache.get(1) is cache.get(1)
    assert cache.get(3).k == 3


@pytest.mark.parametrize("algorithm", list(Algorithm))
def test_run_detector_every_algorithm(star_network, algorithm):
    """Test that every registered detector returns B active nodes."""
    state = ActivationState([1, 1, 1, 1, 0])

    result = run_detector(algorithm, star_network, state, 2, rng=np.random.default_rng(0))

    assert result.algorithm == algorithm
    assert len(result.members) == 2
    assert result.members <= {0, 1, 2, 3}


def test_run_detector_accepts_tag_string(star_network):
    """Test that a plain string tag selects the detector."""
    state = ActivationState([1, 1, 1, 1, 0])

    assert run_detector("outdegree", star_network, state, 1).members == frozenset({0})


def test_run_detector_checks_state_size(star_network):
    """Test that the state must match the network."""
    with pytest.raises(ArgumentError):
        run_detector(Algorithm.MBED, star_network, ActivationState([1, 1]), 1)


# ============================================================================
# Experiment Tests
# ============================================================================

def test_experiment_record_order(star_network):
    """Test that records come by replication, then in configured detector order."""
    exp = experiment(algorithms=[Algorithm.RANDOM, Algorithm.MBED])

    records = run_experiment(exp, star_network)

    assert [(r.replication, r.algorithm) for r in records] == [
        (rep, algo) for rep in range(3) for algo in (Algorithm.RANDOM, Algorithm.MBED)
    ]
    for record in records:
        assert not record.skipped
        assert record.budget == 1
        assert record.wall_ms == 0.0
        assert record.f2_mean is None


def test_experiment_is_deterministic(star_network):
    """Test that equal configurations give identical records."""
    exp = experiment(algorithms=list(Algorithm))

    assert run_experiment(exp, star_network) == run_experiment(exp, star_network)


def test_experiment_workers_match_serial(star_network):
    """Test that parallel replications give the serial records."""
    serial = run_experiment(experiment(workers=1), star_network)
    parallel = run_experiment(experiment(workers=2), star_network)

    assert parallel == serial


def test_experiment_f2_columns(star_network):
    """Test that f2 is estimated only when enabled."""
    records = run_experiment(experiment(f2=True, algorithms=[Algorithm.MLBED]), star_network)

    assert all(r.f2_mean is not None and r.f2_stderr is not None for r in records)


def test_experiment_random_protocol_budget(star_network):
    """Test that the random protocol draws a budget within 1..n1."""
    records = run_experiment(experiment(protocol=Protocol.RANDOM, size=4), star_network)

    for record in records:
        assert record.n1 == 4
        assert 1 <= record.budget <= record.n1


def test_experiment_skips_impossible_budget(star_network, caplog):
    """Test that a budget above N1 becomes a skipped record with a reason."""
    records = run_experiment(experiment(size=9, replications=1, algorithms=[Algorithm.MBED]), star_network)

    assert records[0].skipped
    assert "not in 1.." in records[0].reason
    assert records[0].f1_mean is None
    assert "skipping" in caplog.text


def test_experiment_single_replication_splits_tables(star_network):
    """Test that one replication with several workers matches the serial records."""
    algorithms = [Algorithm.MBED, Algorithm.FBED]
    serial = run_experiment(experiment(replications=1, algorithms=algorithms), star_network)
    split = run_experiment(experiment(replications=1, workers=3, algorithms=algorithms), star_network)

    assert split == serial


def test_mbed_beats_random_on_seeded_cascades():
    """Test that over 50 seeded replications MBED's mean f1 is at most Random's under shared coins."""
    rng = np.random.default_rng(17)
    pairs = set()
    while len(pairs) < 240:
        u, v = (int(x) for x in rng.integers(0, 80, size=2))
        if u != v:
            pairs.add((min(u, v), max(u, v)))
    edges = {}
    for u, v in pairs:
        edges[(u, v)] = 0.0
        edges[(v, u)] = 0.0
    net = assign_probabilities(IcNetwork(80, edges), ProbabilityModel.weighted_cascade())
    exp = experiment(size=4, trials=300, seed=11, replications=50, algorithms=[Algorithm.MBED, Algorithm.RANDOM])

    records = run_experiment(exp, net)

    means = {}
    for algorithm in (Algorithm.MBED, Algorithm.RANDOM):
        values = [r.f1_mean for r in records if r.algorithm == algorithm and not r.skipped]
        assert len(values) == 50
        means[algorithm] = float(np.mean(values))
    assert means[Algorithm.MBED] <= means[Algorithm.RANDOM]


def test_evaluation_seed_shares_streams():
    """Test that common random numbers give every detector the same coins."""
    shared = experiment(common_random_numbers=True)
    separate = experiment(common_random_numbers=False)

    assert _evaluation_seed(shared, 0, 0) == _evaluation_seed(shared, 0, 3)
    assert _evaluation_seed(separate, 0, 0) != _evaluation_seed(separate, 0, 3)
    assert _evaluation_seed(shared, 0, 0) != _evaluation_seed(shared, 1, 0)


def test_load_experiment_network(study_files):
    """Test that the experiment graph is read with its probability model."""
    exp = experiment(graph=study_files["graph"], probability="uniform:0.2", undirected=True)

    net = load_experiment_network(exp)

    assert net.node_count == 4
    assert net.edge_count == 8
    assert net.probability(net.index_of("a"), net.index_of("b")) == pytest.approx(0.2)


# ============================================================================
# Lambda Sweep Tests
# ============================================================================

def test_sweep_rows(star_network):
    """Test one row per (lambda, detector), lambda-major."""
    state = ActivationState([1, 1, 1, 1, 0])

    records = run_lambda_sweep(star_network, state, [0.1, 0.5, 0.9], trials=100)

    assert [(r.lam, r.algorithm) for r in records] == [
        (lam, algo) for lam in (0.1, 0.5, 0.9) for algo in (Algorithm.MBED, Algorithm.RANDOM)
    ]


def test_sweep_is_deterministic(star_network):
    """Test that the sweep is a function of its seed."""
    state = ActivationState([1, 1, 1, 1, 0])

    first = run_lambda_sweep(star_network, state, [0.2, 0.8], trials=100, seed=3)
    second = run_lambda_sweep(star_network, state, [0.2, 0.8], trials=100, seed=3)

    assert first == second
