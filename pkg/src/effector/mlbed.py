"""
Maximum-likelihood effector detection.

On a DAG of active nodes the likelihood of the observed state factors per
node, so the best B effectors are the B nodes least likely to be activated
by their parents. General graphs are first reduced to DAGs by a
permutation-based extraction that keeps at least half of the best
achievable edge entropy.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from effector.errors import ArgumentError, NotADagError
from effector.graph import ActivationState, IcNetwork
from effector.models import Algorithm, EffectorResult

logger = logging.getLogger(__name__)


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class LayeredPartition:
    """Layers F0..Fm; F0 holds the parentless nodes."""

    layers: tuple[frozenset[int], ...]

    @property
    def roots(self) -> frozenset[int]:
        return self.layers[0] if self.layers else frozenset()

    def layer_of(self, u: int) -> int:
        for depth, layer in enumerate(self.layers):
            if u in layer:
                return depth
        raise ArgumentError(f"Node {u} is not in the partition")


@dataclass(frozen=True)
class ExtractedDag:
    nodes: frozenset[int]
    kept_edges: tuple[int, ...]
    entropy: float


def _parent_map(net: IcNetwork, members: frozenset[int], edge_ids: Iterable[int]) -> dict[int, list[int]]:
    """Edge ids into each member from other members."""
    parents: dict[int, list[int]] = {u: [] for u in members}
    for eid in edge_ids:
        u, v = int(net.sources[eid]), int(net.targets[eid])
        if u in members and v in members:
            parents[v].append(eid)
    return parents


# ============================================================================
# Hierarchical Partition
# ============================================================================

def hierarchical_partition(
    net: IcNetwork,
    component: Iterable[int],
    edge_ids: Optional[Iterable[int]] = None,
) -> LayeredPartition:
    """
    Layer a node set by parent availability.

    F0 holds nodes without a parent in the set; F_i holds the nodes whose
    parents all lie in F0..F_{i-1}.

    Args:
        net: The network
        component: Node set to layer
        edge_ids: Edges to consider (default: all edges induced on the set)

    Raises:
        NotADagError: If the considered edges contain a directed cycle
    """
    members = frozenset(component)
    if edge_ids is None:
        edge_ids = net.induced_edges(members)
    parents = {
        u: {int(net.sources[eid]) for eid in eids}
        for u, eids in _parent_map(net, members, edge_ids).items()
    }

    layers: list[frozenset[int]] = []
    placed: set[int] = set()
    remaining = set(members)
    while remaining:
        layer = frozenset(u for u in remaining if parents[u] <= placed)
        if not layer:
            raise NotADagError(f"Cycle among nodes {sorted(remaining)[:10]}")
        layers.append(layer)
        placed |= layer
        remaining -= layer
    return LayeredPartition(tuple(layers))


# ============================================================================
# Likelihood
# ============================================================================

def _log_miss(probs: np.ndarray) -> float:
    """ln prod(1 - p); -inf when some p is 1."""
    with np.errstate(divide="ignore"):
        return float(np.log1p(-probs).sum())


def _log_hit(log_miss: float) -> float:
    """ln(1 - exp(log_miss)); -inf when that probability is 0."""
    if log_miss == 0.0:
        return -math.inf
    return math.log(-math.expm1(log_miss))


def node_activation_scores(
    net: IcNetwork,
    members: Iterable[int],
    dag_edges: Iterable[int],
) -> dict[int, float]:
    """
    q(u) = 1 - prod over DAG parents v of (1 - Pr[(v, u)]) for every member.

    Parentless members get q = 0.
    """
    nodes = frozenset(members)
    return {
        u: 0.0 - math.expm1(_log_miss(net.probs[eids])) if eids else 0.0
        for u, eids in _parent_map(net, nodes, dag_edges).items()
    }


def _check_subset(state: ActivationState, members: Iterable[int]) -> frozenset[int]:
    chosen = frozenset(members)
    outside = chosen - set(state.active)
    if outside:
        raise ArgumentError(f"Nodes {sorted(outside)} are not active")
    return chosen


def log_likelihood(
    net: IcNetwork,
    state: ActivationState,
    dag_edges: Iterable[int],
    members: Iterable[int],
) -> float:
    """
    ln Pr(observed state | S) under DAG parents inside X1.

    The X0 factor uses every original edge from X1 to X0; the X1 factor
    multiplies q(u) over non-seed active nodes.

    Raises:
        ArgumentError: If S is not a subset of X1
    """
    state.check_network(net)
    chosen = _check_subset(state, members)

    leaving = state.bits[net.sources] & ~state.bits[net.targets]
    total = _log_miss(net.probs[leaving])

    parents = _parent_map(net, frozenset(state.active), dag_edges)
    for u in state.active:
        if u in chosen:
            continue
        if not parents[u]:
            return -math.inf
        total += _log_hit(_log_miss(net.probs[parents[u]]))
    return total


def mle_select_on_dag(
    net: IcNetwork,
    state: ActivationState,
    dag_edges: Iterable[int],
    budget: int,
) -> EffectorResult:
    """
    Pick the B active nodes with the smallest q(u), ties by node id.

    When more than B nodes have q = 0 every size-B set has likelihood 0;
    the result is still returned with ``zero_likelihood`` set.

    Raises:
        ArgumentError: If the budget is outside 1..N1
        NotADagError: If the DAG edges contain a cycle
    """
    state.check_network(net)
    if not 1 <= budget <= state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1}, got {budget}")

    dag_edges = list(dag_edges)
    partition = hierarchical_partition(net, state.active, dag_edges)
    scores = node_activation_scores(net, state.active, dag_edges)
    ranked = sorted(scores, key=lambda u: (scores[u], u))
    members = frozenset(ranked[:budget])
    certain_roots = sum(1 for q in scores.values() if q == 0.0)

    return EffectorResult(
        members=members,
        budget=budget,
        algorithm=Algorithm.MLBED,
        score=log_likelihood(net, state, dag_edges, members),
        zero_likelihood=certain_roots > budget,
        details={"layers": len(partition.layers), "roots": len(partition.roots)},
    )


# ============================================================================
# DAG Extraction
# ============================================================================

def edge_entropy(p: float) -> float:
    """
    -p ln p, with 0 at p = 0.

    Raises:
        ArgumentError: If p is outside [0, 1]
    """
    if not 0.0 <= p <= 1.0:
        raise ArgumentError(f"Probability must be in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log(p)


def _would_create_cycle(successors: dict[int, list[int]], u: int, v: int) -> bool:
    """True if adding u -> v closes a cycle, i.e. v already reaches u."""
    visited = set()
    stack = [v]
    while stack:
        current = stack.pop()
        if current == u:
            return True
        if current in visited:
            continue
        visited.add(current)
        stack.extend(successors.get(current, []))
    return False


def pbde_extract(net: IcNetwork, component: Iterable[int], order: Sequence[int]) -> ExtractedDag:
    """
    Extract a DAG from the subgraph induced on ``component``.

    Edges are split by ``order`` into backward (L) and forward (R) sets,
    each acyclic. The side with larger entropy is kept, then edges of the
    other side are added in decreasing entropy whenever they close no cycle.

    Raises:
        ArgumentError: If ``order`` is not a permutation of the component
    """
    members = frozenset(component)
    if len(order) != len(members) or set(order) != members:
        raise ArgumentError("Order must be a permutation of the component")
    rank = {u: i for i, u in enumerate(order)}

    entropy = {eid: edge_entropy(float(net.probs[eid])) for eid in net.induced_edges(members)}
    backward = [eid for eid in entropy if rank[int(net.sources[eid])] > rank[int(net.targets[eid])]]
    forward = [eid for eid in entropy if rank[int(net.sources[eid])] < rank[int(net.targets[eid])]]

    if sum(entropy[e] for e in backward) >= sum(entropy[e] for e in forward):
        kept, others = backward, forward
    else:
        kept, others = forward, backward
    kept = list(kept)

    successors: dict[int, list[int]] = {}
    for eid in kept:
        successors.setdefault(int(net.sources[eid]), []).append(int(net.targets[eid]))

    for eid in sorted(others, key=lambda e: (-entropy[e], e)):
        u, v = int(net.sources[eid]), int(net.targets[eid])
        if _would_create_cycle(successors, u, v):
            continue
        successors.setdefault(u, []).append(v)
        kept.append(eid)

    kept.sort()
    return ExtractedDag(members, tuple(kept), float(sum(entropy[e] for e in kept)))


def weak_components(net: IcNetwork, nodes: Iterable[int]) -> list[frozenset[int]]:
    """Weakly connected components of the induced subgraph, ordered by smallest node."""
    members = sorted(set(nodes))
    graph = nx.DiGraph()
    graph.add_nodes_from(members)
    graph.add_edges_from(
        (int(net.sources[eid]), int(net.targets[eid])) for eid in net.induced_edges(members)
    )
    return sorted((frozenset(c) for c in nx.weakly_connected_components(graph)), key=min)


def extract_dags(
    net: IcNetwork,
    state: ActivationState,
    order_seed: Optional[int] = None,
) -> list[ExtractedDag]:
    """
    Run the extraction on every weak component of X1.

    Without ``order_seed`` each component uses node-id order; with it, a
    random order drawn from one generator per call, components in turn.
    """
    state.check_network(net)
    rng = np.random.default_rng(order_seed) if order_seed is not None else None
    dags = []
    for component in weak_components(net, state.active):
        order = sorted(component)
        if rng is not None:
            order = [order[i] for i in rng.permutation(len(order))]
        dags.append(pbde_extract(net, component, order))
    return dags


def mlbed(
    net: IcNetwork,
    state: ActivationState,
    budget: int,
    order_seed: Optional[int] = None,
) -> EffectorResult:
    """
    Detect ``budget`` effectors by likelihood on extracted DAGs.

    Args:
        net: The network
        state: Observed activation state
        budget: Number of effectors B (1..N1)
        order_seed: Seed for random node orders (default: node-id order)

    Returns:
        The B globally smallest-q nodes; the score is the log-likelihood
    """
    dags = extract_dags(net, state, order_seed)
    dag_edges = [eid for dag in dags for eid in dag.kept_edges]
    logger.debug("MLBED: %d component(s), %d DAG edge(s)", len(dags), len(dag_edges))

    result = mle_select_on_dag(net, state, dag_edges, budget)
    result.details.update(
        components=len(dags),
        entropy=float(sum(dag.entropy for dag in dags)),
    )
    return result
