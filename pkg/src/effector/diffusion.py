"""
Monte Carlo simulation of the independent-cascade model.

Every coin is a pure function of (master seed, trial index, edge id), so a
trial can be replayed in isolation and two seed sets evaluated under the same
master seed see exactly the same live edges.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from effector.errors import ArgumentError
from effector.graph import ActivationState, IcNetwork
from effector.models import MetricEstimate

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 10000

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


# ============================================================================
# Counter-Based Coins
# ============================================================================

def _mix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class CoinStream:
    """Coins of one trial under a master seed."""

    seed: int
    trial: int = 0

    @property
    def key(self) -> int:
        return _mix64((self.seed & _MASK64) ^ _mix64(self.trial & _MASK64))

    def uniforms(self, edge_ids: np.ndarray) -> np.ndarray:
        """Uniform [0, 1) value for each edge id, fixed for this trial."""
        ids = np.asarray(edge_ids, dtype=np.uint64)
        bits = _mix64_array(np.uint64(self.key) ^ ids)
        return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


# ============================================================================
# Single Realization
# ============================================================================

@dataclass(frozen=True)
class DiffusionOutcome:
    final_state: ActivationState
    rounds: int


def _seed_array(net: IcNetwork, seeds: Iterable[int]) -> np.ndarray:
    array = np.unique(np.fromiter((int(s) for s in seeds), dtype=np.int64))
    if array.size and (array[0] < 0 or array[-1] >= net.node_count):
        raise ArgumentError(f"Seed set contains nodes outside 0..{net.node_count - 1}")
    return array


def _out_edge_ids(net: IcNetwork, frontier: np.ndarray) -> np.ndarray:
    starts = net.out_ptr[frontier]
    counts = net.out_ptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.repeat(starts - (np.cumsum(counts) - counts), counts)
    return offsets + np.arange(total, dtype=np.int64)


def _spread(net: IcNetwork, seeds: np.ndarray, stream: CoinStream) -> tuple[np.ndarray, int]:
    active = np.zeros(net.node_count, dtype=bool)
    if seeds.size == 0:
        return active, 0

    active[seeds] = True
    frontier = seeds
    rounds = 0
    while True:
        edge_ids = _out_edge_ids(net, frontier)
        if edge_ids.size == 0:
            break
        targets = net.targets[edge_ids]
        fresh = ~active[targets]
        edge_ids, targets = edge_ids[fresh], targets[fresh]
        live = stream.uniforms(edge_ids) < net.probs[edge_ids]
        newly = np.unique(targets[live])
        if newly.size == 0:
            break
        active[newly] = True
        frontier = newly
        rounds += 1
    return active, rounds


def simulate_once(net: IcNetwork, seeds: Iterable[int], stream: CoinStream) -> DiffusionOutcome:
    """
    Run one IC diffusion from ``seeds``.

    Newly activated nodes try each out-edge towards an inactive node once.
    The process stops after a round that activates nobody.

    Args:
        net: The network
        seeds: Initially active nodes (may be empty)
        stream: Coins for this realization

    Returns:
        Final activation state and the number of rounds that activated someone
    """
    active, rounds = _spread(net, _seed_array(net, seeds), stream)
    return DiffusionOutcome(ActivationState(active), rounds)


def iter_realizations(
    net: IcNetwork,
    seeds: Iterable[int],
    trials: int,
    seed: int = 0,
) -> Iterator[np.ndarray]:
    """
    Yield the final active mask of each trial 0..trials-1.

    Raises:
        ArgumentError: If trials < 1
    """
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")
    seed_nodes = _seed_array(net, seeds)
    for trial in range(trials):
        active, _ = _spread(net, seed_nodes, CoinStream(seed, trial))
        yield active


# ============================================================================
# Estimators
# ============================================================================

def _check_trials(trials: int) -> None:
    if trials < 1:
        raise ArgumentError(f"trials must be >= 1, got {trials}")


def _summarize(samples: np.ndarray) -> MetricEstimate:
    trials = int(samples.size)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MetricEstimate(mean=mean, stderr=stderr, trials=trials)


def estimate_f1(
    net: IcNetwork,
    target: ActivationState,
    seeds: Iterable[int],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> MetricEstimate:
    """
    Expected Hamming distance between ``target`` and the realized state.

    Args:
        net: The network
        target: Observed activation state A*
        seeds: Candidate effector set S
        trials: Number of Monte Carlo trials
        seed: Master seed of the coin streams

    Returns:
        Estimate of f1(S)
    """
    _check_trials(trials)
    target.check_network(net)
    samples = np.fromiter(
        (np.count_nonzero(active != target.bits)
         for active in iter_realizations(net, seeds, trials, seed)),
        dtype=np.float64,
        count=trials,
    )
    logger.debug("f1 over %d trials: mean %.4f", trials, samples.mean())
    return _summarize(samples)


def estimate_spread(
    net: IcNetwork,
    seeds: Iterable[int],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> MetricEstimate:
    """Expected number of active nodes at the end of the diffusion."""
    _check_trials(trials)
    samples = np.fromiter(
        (np.count_nonzero(active) for active in iter_realizations(net, seeds, trials, seed)),
        dtype=np.float64,
        count=trials,
    )
    return _summarize(samples)


def estimate_alpha(
    net: IcNetwork,
    seeds: Iterable[int],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> np.ndarray:
    """
    Empirical activation probability of every node.

    Returns:
        Vector of length N; seed entries are exactly 1
    """
    _check_trials(trials)
    counts = np.zeros(net.node_count, dtype=np.int64)
    for active in iter_realizations(net, seeds, trials, seed):
        counts += active
    return counts / trials


def estimate_f2(
    net: IcNetwork,
    target: ActivationState,
    seeds: Iterable[int],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> MetricEstimate:
    """
    L1 distance between ``target`` and the expected activation vector.

    The standard error is the sum of per-node binomial standard errors,
    which bounds the error of the sum.
    """
    _check_trials(trials)
    target.check_network(net)
    alpha = estimate_alpha(net, seeds, trials, seed)
    mean = float(np.abs(target.bits.astype(np.float64) - alpha).sum())
    stderr = float(np.sqrt(alpha * (1.0 - alpha) / trials).sum())
    return MetricEstimate(mean=mean, stderr=stderr, trials=trials)
