"""Tests for Monte Carlo diffusion and the effector metrics."""

import math
import warnings

import numpy as np
import pytest

from effector.diffusion import (
    CoinStream,
    estimate_alpha,
    estimate_f1,
    estimate_f2,
    estimate_spread,
    iter_realizations,
    simulate_once,
)
from effector.errors import ArgumentError
from effector.graph import ActivationState
from effector.models import MetricEstimate


def random_network(make_network, rng, node_count=12, density=0.25):
    edges = {
        (u, v): float(rng.uniform(0.05, 1.0))
        for u in range(node_count) for v in range(node_count)
        if u != v and rng.random() < density
    }
    return make_network(node_count, edges)


# ============================================================================
# Coin Stream Tests
# ============================================================================

def test_coins_are_uniform_in_unit_interval():
    """Test that coins lie in [0, 1) and look uniform."""
    coins = CoinStream(seed=3, trial=0).uniforms(np.arange(20000))

    assert coins.min() >= 0.0
    assert coins.max() < 1.0
    assert abs(coins.mean() - 0.5) < 0.02


def test_coins_are_pure_functions():
    """Test that a coin depends only on (seed, trial, edge id)."""
    ids = np.array([5, 0, 17])
    first = CoinStream(9, 4).uniforms(ids)
    again = CoinStream(9, 4).uniforms(ids[::-1])[::-1]

    assert np.array_equal(first, again)
    assert not np.array_equal(first, CoinStream(9, 5).uniforms(ids))
    assert not np.array_equal(first, CoinStream(10, 4).uniforms(ids))


# ============================================================================
# Single Realization Tests
# ============================================================================

def test_certain_edge_activates(make_network):
    """Test that a probability-1 edge always fires in round 1."""
    net = make_network(2, {(0, 1): 1.0})

    outcome = simulate_once(net, {0}, CoinStream(0))

    assert outcome.final_state.active == (0, 1)
    assert outcome.rounds == 1


def test_impossible_edge_never_activates(make_network):
    """Test that a probability-0 edge never fires."""
    net = make_network(2, {(0, 1): 0.0})

    outcome = simulate_once(net, {0}, CoinStream(0))

    assert outcome.final_state.active == (0,)
    assert outcome.rounds == 0


def test_empty_seed_set(chain_network):
    """Test that no seeds leaves everything inactive."""
    outcome = simulate_once(chain_network, set(), CoinStream(0))

    assert outcome.final_state.n1 == 0
    assert outcome.rounds == 0


def test_seed_outside_network(chain_network):
    """Test that seeds must be nodes of the network."""
    with pytest.raises(ArgumentError):
        simulate_once(chain_network, {3}, CoinStream(0))


def test_rounds_follow_chain_depth(make_network):
    """Test that a certain chain of length 3 takes 3 rounds."""
    net = make_network(4, {(0, 1): 1.0, (1, 2): 1.0, (2, 3): 1.0})

    assert simulate_once(net, {0}, CoinStream(0)).rounds == 3


def test_outcome_invariants(make_network):
    """Test that seeds stay active and every other active node has an active in-neighbour."""
    rng = np.random.default_rng(11)
    for trial in range(30):
        net = random_network(make_network, rng)
        seeds = {int(u) for u in rng.choice(net.node_count, size=2, replace=False)}
        state = simulate_once(net, seeds, CoinStream(5, trial)).final_state

        for s in seeds:
            assert state.is_active(s)
        for u in set(state.active) - seeds:
            assert any(state.is_active(v) for v in net.in_neighbors(u))


def test_simulation_is_deterministic(diamond_network):
    """Test that the same stream reproduces the same outcome."""
    stream = CoinStream(42, 7)

    assert simulate_once(diamond_network, {0}, stream) == simulate_once(diamond_network, {0}, stream)


def test_common_random_numbers_containment(make_network):
    """Test that under shared coins the active set of S is inside that of a superset."""
    rng = np.random.default_rng(2)
    net = random_network(make_network, rng, node_count=15, density=0.2)

    small = iter_realizations(net, {0}, trials=200, seed=8)
    large = iter_realizations(net, {0, 7}, trials=200, seed=8)
    for a, b in zip(small, large):
        assert not np.any(a & ~b)


def test_iter_realizations_requires_trials(chain_network):
    """Test that zero trials is an argument error."""
    with pytest.raises(ArgumentError):
        list(iter_realizations(chain_network, {0}, trials=0))


# ============================================================================
# f1 Tests
# ============================================================================

def test_f1_isolated_node_exact(make_network):
    """Test that an isolated seed matching the target gives f1 = 0."""
    net = make_network(1, {})

    estimate = estimate_f1(net, ActivationState([1]), {0}, trials=50)

    assert estimate.mean == 0.0
    assert estimate.stderr == 0.0
    assert estimate.trials == 50


def test_f1_half_edge(make_network):
    """Test that p = 0.5 and target (1, 1) give f1 near 0.5."""
    net = make_network(2, {(0, 1): 0.5})

    estimate = estimate_f1(net, ActivationState([1, 1]), {0}, trials=10000, seed=1)

    assert abs(estimate.mean - 0.5) < 0.03
    assert estimate.stderr == pytest.approx(0.005, abs=0.0005)


def test_f1_certain_mismatch(make_network):
    """Test that a certain edge towards an inactive target costs exactly 1."""
    net = make_network(2, {(0, 1): 1.0})

    assert estimate_f1(net, ActivationState([1, 0]), {0}, trials=100).mean == 1.0


@pytest.mark.parametrize("estimate", [
    lambda net: estimate_f1(net, ActivationState([1, 1, 0]), {0}, trials=0),
    lambda net: estimate_f2(net, ActivationState([1, 1, 0]), {0}, trials=0),
    lambda net: estimate_spread(net, {0}, trials=0),
    lambda net: estimate_alpha(net, {0}, trials=0),
])
def test_estimators_reject_zero_trials_up_front(chain_network, estimate):
    """Test that trials = 0 is rejected before any averaging happens."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        with pytest.raises(ArgumentError, match="trials"):
            estimate(chain_network)


def test_f1_stderr_formula(diamond_network):
    """Test stderr = sample standard deviation / sqrt(trials)."""
    target = ActivationState([1, 1, 0, 1])
    samples = np.array([
        np.count_nonzero(active != target.bits)
        for active in iter_realizations(diamond_network, {0}, trials=400, seed=3)
    ], dtype=float)

    estimate = estimate_f1(diamond_network, target, {0}, trials=400, seed=3)

    assert estimate.mean == pytest.approx(samples.mean())
    assert estimate.stderr == pytest.approx(samples.std(ddof=1) / math.sqrt(400))


def test_f1_all_ones_target_is_influence_maximization(make_network):
    """Test f1 = N - E[|active set|] for the all-ones target."""
    rng = np.random.default_rng(4)
    net = random_network(make_network, rng)
    target = ActivationState(np.ones(net.node_count, dtype=int))

    f1 = estimate_f1(net, target, {0, 1}, trials=300, seed=6)
    spread = estimate_spread(net, {0, 1}, trials=300, seed=6)

    assert f1.mean == pytest.approx(net.node_count - spread.mean, abs=1e-9)


# ============================================================================
# Activation Probability Tests
# ============================================================================

def test_alpha_calibration(make_network):
    """Test that a single p = 0.3 edge gives alpha(b) in [0.28, 0.32] over 10000 trials."""
    net = make_network(2, {(0, 1): 0.3})

    alpha = estimate_alpha(net, {0}, trials=10000, seed=0)

    assert alpha[0] == 1.0
    assert 0.28 <= alpha[1] <= 0.32


def test_alpha_unreachable_node(chain_network):
    """Test that nodes the seeds cannot reach have alpha 0."""
    alpha = estimate_alpha(chain_network, {1}, trials=200)

    assert alpha[0] == 0.0
    assert alpha[1] == 1.0


# ============================================================================
# f2 Tests
# ============================================================================

def test_f2_exact_match(make_network):
    """Test that a deterministic exact match gives f2 = 0."""
    net = make_network(2, {(0, 1): 1.0})

    estimate = estimate_f2(net, ActivationState([1, 1]), {0}, trials=100)

    assert estimate.mean == 0.0
    assert estimate.stderr == 0.0


@pytest.mark.parametrize("target", [[1, 1], [1, 0]])
def test_f2_half_edge(make_network, target):
    """Test that p = 0.5 gives f2 near 0.5 for either value of the target at b."""
    net = make_network(2, {(0, 1): 0.5})

    estimate = estimate_f2(net, ActivationState(target), {0}, trials=10000, seed=2)

    assert abs(estimate.mean - 0.5) < 0.03


def test_metric_estimate_validation():
    """Test that MetricEstimate rejects impossible values."""
    with pytest.raises(ArgumentError):
        MetricEstimate(mean=1.0, stderr=0.0, trials=0)

    with pytest.raises(ArgumentError):
        MetricEstimate(mean=-1.0, stderr=0.0, trials=1)
