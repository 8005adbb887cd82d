"""
Flow-based effector detection for k-IDBED.

The active nodes form a complete directed graph whose cut weight
W(cut(S, X1 \\ S)) equals g_k(S) whenever |S| = B. A global minimum cut
seeds the search; greedy single-node moves repair the size and rounds of
locked pair exchanges improve the cut.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx
import numpy as np

from effector.distance import DistanceTable, table_for_state
from effector.errors import ArgumentError
from effector.graph import ActivationState, IcNetwork
from effector.models import Algorithm, EffectorResult

logger = logging.getLogger(__name__)

DEFAULT_K = 3
GAIN_EPSILON = 1e-12

# Capacities are scaled so the largest finite weight maps to this integer.
_FLOW_RESOLUTION = 1 << 40


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class CutGraph:
    """Complete weighted digraph on X1; ``weights[i, j]`` is w(nodes[i], nodes[j])."""

    nodes: tuple[int, ...]
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def index(self, members: Iterable[int]) -> np.ndarray:
        """Boolean mask over ``nodes`` for the given node ids."""
        position = {u: i for i, u in enumerate(self.nodes)}
        mask = np.zeros(self.size, dtype=bool)
        for u in members:
            if u not in position:
                raise ArgumentError(f"Node {u} is not in the cut graph")
            mask[position[u]] = True
        return mask

    def weight(self, u: int, v: int) -> float:
        position = {w: i for i, w in enumerate(self.nodes)}
        return float(self.weights[position[u], position[v]])


@dataclass(frozen=True)
class Partition:
    s1: frozenset[int]
    s2: frozenset[int]
    rounds: int = 0

    def __post_init__(self):
        object.__setattr__(self, "s1", frozenset(self.s1))
        object.__setattr__(self, "s2", frozenset(self.s2))
        if self.s1 & self.s2:
            raise ArgumentError(f"Partition sides overlap on {sorted(self.s1 & self.s2)}")


# ============================================================================
# Cut Graph
# ============================================================================

def build_cut_graph(
    state: ActivationState,
    budget: int,
    lam: float,
    table: DistanceTable,
) -> CutGraph:
    """
    Materialize w(u, v) = lam * d(u, v) + (1 - lam) * d(v, X0) / B on X1.

    Zero factors never multiply an infinite distance; the diagonal is 0.

    Raises:
        ArgumentError: If the budget is not in 1..N1-1 or lam outside [0, 1]
    """
    if not 1 <= budget < state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1 - 1}, got {budget}")
    if not 0.0 <= lam <= 1.0:
        raise ArgumentError(f"lambda must be in [0, 1], got {lam}")

    nodes = state.active
    n1 = len(nodes)
    weights = np.zeros((n1, n1))
    if lam > 0:
        weights += lam * table.submatrix(nodes, nodes)
    if lam < 1 and state.inactive:
        to_inactive = table.submatrix(nodes, state.inactive).sum(axis=1)
        weights += ((1.0 - lam) / budget) * to_inactive[np.newaxis, :]
    np.fill_diagonal(weights, 0.0)
    return CutGraph(nodes, weights)


def cut_weight(g: CutGraph, members: Iterable[int]) -> float:
    """W(cut(S, X1 \\ S)) for S = ``members``; +inf if any cut edge is infinite."""
    mask = g.index(members)
    return float(g.weights[np.ix_(mask, ~mask)].sum())


def _working_weights(g: CutGraph) -> np.ndarray:
    """Weights with +inf replaced by a value above any finite cut."""
    weights = g.weights
    finite = np.isfinite(weights)
    if finite.all():
        return weights
    big = (float(weights[finite].sum()) + 1.0) * (g.size ** 2 + 1)
    return np.where(finite, weights, big)


# ============================================================================
# Global Minimum Cut
# ============================================================================

def _flow_network(g: CutGraph) -> nx.DiGraph:
    weights = g.weights
    finite = np.isfinite(weights)
    largest = float(weights[finite].max()) if finite.any() else 0.0
    scale = _FLOW_RESOLUTION / largest if largest > 0 else 1.0
    capacities = {
        (i, j): int(round(weights[i, j] * scale))
        for i in range(g.size) for j in range(g.size)
        if i != j and finite[i, j] and weights[i, j] > 0
    }
    sentinel = sum(capacities.values()) + 1
    for i, j in zip(*np.nonzero(~finite)):
        capacities[(int(i), int(j))] = sentinel

    flow = nx.DiGraph()
    flow.add_nodes_from(range(g.size))
    for (i, j), capacity in capacities.items():
        if capacity > 0:
            flow.add_edge(i, j, capacity=capacity)
    return flow


def global_min_cut(g: CutGraph) -> Partition:
    """
    Directed global minimum cut of the cut graph.

    Pins the first node s and solves s->t and t->s minimum cuts for every
    other node t; the side holding the flow source becomes S1.

    Raises:
        ArgumentError: If the graph has fewer than two nodes
    """
    if g.size < 2:
        raise ArgumentError("A cut needs at least two nodes")

    flow = _flow_network(g)
    best: Optional[tuple[float, frozenset[int]]] = None
    for t in range(1, g.size):
        for source, sink in ((0, t), (t, 0)):
            _, (reachable, _) = nx.minimum_cut(flow, source, sink)
            side = frozenset(g.nodes[i] for i in reachable)
            weight = cut_weight(g, side)
            if best is None or weight < best[0]:
                best = (weight, side)

    s1 = best[1]
    logger.debug("Global minimum cut: |S1|=%d weight %.6g", len(s1), best[0])
    return Partition(s1, frozenset(g.nodes) - s1)


# ============================================================================
# Size Repair
# ============================================================================

def _side_sums(weights: np.ndarray, in1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per node: weight into S2 (row sums) and weight from S1 (column sums)."""
    in2 = ~in1
    return weights @ in2.astype(np.float64), in1.astype(np.float64) @ weights


def repair_size(g: CutGraph, p: Partition, budget: int) -> Partition:
    """
    Move single nodes across the cut until |S1| = budget.

    Each move picks the node whose move gives the smallest resulting cut;
    ties go to the lowest node id.

    Raises:
        ArgumentError: If the budget is not in 1..N1-1
    """
    if not 1 <= budget < g.size:
        raise ArgumentError(f"Budget must be in 1..{g.size - 1}, got {budget}")

    weights = _working_weights(g)
    in1 = g.index(p.s1)
    while in1.sum() != budget:
        to_s2, from_s1 = _side_sums(weights, in1)
        current = float(to_s2[in1].sum())
        shrinking = in1.sum() > budget
        if shrinking:
            # u leaves S1: its edges into S2 vanish, edges from S1 into u appear
            candidates = np.flatnonzero(in1)
            resulting = current - to_s2[candidates] + from_s1[candidates]
        else:
            # u joins S1: edges from S1 into u vanish, its edges into S2 appear
            candidates = np.flatnonzero(~in1)
            resulting = current - from_s1[candidates] + to_s2[candidates]
        choice = candidates[int(np.argmin(resulting))]
        in1[choice] = not shrinking

    s1 = frozenset(u for u, inside in zip(g.nodes, in1.tolist()) if inside)
    return Partition(s1, frozenset(g.nodes) - s1, p.rounds)


# ============================================================================
# Pair Exchange
# ============================================================================

def swap_gains(weights: np.ndarray, in1: np.ndarray) -> np.ndarray:
    """
    Gain of swapping row node u1 (in S1) with column node u2 (in S2).

    gain[u1, u2] = cut before - cut after, for every ordered index pair;
    entries not of the form (S1, S2) are meaningless.
    """
    to_s2, from_s1 = _side_sums(weights, in1)
    return (
        from_s1[np.newaxis, :] + to_s2[:, np.newaxis] - weights
        - from_s1[:, np.newaxis] - to_s2[np.newaxis, :] - weights.T
    )


def _exchange_round(weights: np.ndarray, in1: np.ndarray) -> tuple[list[tuple[int, int]], list[float]]:
    trial = in1.copy()
    locked = np.zeros(len(in1), dtype=bool)
    steps = min(int(in1.sum()), int((~in1).sum()))
    swaps: list[tuple[int, int]] = []
    gains: list[float] = []

    for _ in range(steps):
        rows = np.flatnonzero(trial & ~locked)
        cols = np.flatnonzero(~trial & ~locked)
        if rows.size == 0 or cols.size == 0:
            break
        block = swap_gains(weights, trial)[np.ix_(rows, cols)]
        flat = int(np.argmax(block))
        u1, u2 = int(rows[flat // cols.size]), int(cols[flat % cols.size])
        swaps.append((u1, u2))
        gains.append(float(block.flat[flat]))
        trial[u1], trial[u2] = False, True
        locked[u1] = locked[u2] = True

    return swaps, gains


def exchange_improve(g: CutGraph, p: Partition) -> Partition:
    """
    Improve a partition by rounds of locked pair swaps.

    A round tentatively swaps min(|S1|, |S2|) pairs, each the best swap
    among unlocked nodes, then commits the prefix with the largest total
    gain if that total is positive. Rounds repeat until no prefix gains.

    Returns:
        The improved partition; ``rounds`` counts committed rounds
    """
    weights = _working_weights(g)
    in1 = g.index(p.s1)
    cap = g.size ** 2
    rounds = 0

    while rounds < cap:
        swaps, gains = _exchange_round(weights, in1)
        if not swaps:
            break
        prefix = np.cumsum(gains)
        best = int(np.argmax(prefix))
        if prefix[best] <= GAIN_EPSILON:
            break
        for u1, u2 in swaps[:best + 1]:
            in1[u1], in1[u2] = False, True
        rounds += 1
        logger.debug("Exchange round %d: %d swap(s), gain %.6g", rounds, best + 1, prefix[best])
    else:
        logger.warning("Exchange stopped at the round cap of %d", cap)

    s1 = frozenset(u for u, inside in zip(g.nodes, in1.tolist()) if inside)
    return Partition(s1, frozenset(g.nodes) - s1, p.rounds + rounds)


# ============================================================================
# Detector
# ============================================================================

def fbed(
    net: IcNetwork,
    state: ActivationState,
    budget: int,
    lam: float = 0.5,
    k: int = DEFAULT_K,
    table: Optional[DistanceTable] = None,
) -> EffectorResult:
    """
    Detect ``budget`` effectors with the cut pipeline.

    Args:
        net: The network
        state: Observed activation state
        budget: Number of effectors B (1..N1)
        lam: Trade-off between the two objective terms
        k: Number of disjoint paths per influence distance
        table: k-th distances from X1 to V (computed when omitted)

    Returns:
        S1 after exchange; the score is its cut weight, which equals g_k(S1)

    Raises:
        ArgumentError: If the budget is outside 1..N1 or the table has another k
    """
    state.check_network(net)
    if not 1 <= budget <= state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1}, got {budget}")
    if budget == state.n1:
        return EffectorResult(
            members=frozenset(state.active), budget=budget, algorithm=Algorithm.FBED, score=0.0,
        )

    if table is None:
        table = table_for_state(net, state, k=k)
    elif table.k != k:
        raise ArgumentError(f"Distance table has k={table.k}, expected {k}")

    g = build_cut_graph(state, budget, lam, table)
    cut = global_min_cut(g)
    repaired = repair_size(g, cut, budget)
    improved = exchange_improve(g, repaired)
    score = cut_weight(g, improved.s1)

    return EffectorResult(
        members=improved.s1,
        budget=budget,
        algorithm=Algorithm.FBED,
        score=score,
        details={
            "rounds": improved.rounds,
            "stage_weights": {
                "min_cut": cut_weight(g, cut.s1),
                "repair": cut_weight(g, repaired.s1),
                "exchange": score,
            },
        },
    )
