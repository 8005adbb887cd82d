"""Graph module for independent-cascade networks and activation states."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence

import numpy as np

from effector.errors import ArgumentError, EdgeListParseError, GraphError, UnknownNodeError

logger = logging.getLogger(__name__)


# ============================================================================
# IC Network
# ============================================================================

class IcNetwork:
    """
    Directed graph with a propagation probability on every edge.

    Nodes are dense indices 0..N-1; ``labels`` keeps the identifiers they
    were loaded from. Edges are stored sorted by (source, target), so the
    edge id of (u, v) is stable for a given edge set. Instances are never
    mutated after construction.
    """

    def __init__(
        self,
        node_count: int,
        edges: Mapping[tuple[int, int], float],
        labels: Optional[Sequence[str]] = None,
        explicit_probabilities: bool = False,
        skipped_self_loops: int = 0,
    ):
        """
        Build a network.

        Args:
            node_count: Number of nodes N (at least 1)
            edges: Mapping (u, v) -> probability
            labels: Optional external identifier per node (default: "0".."N-1")
            explicit_probabilities: True when every edge probability came from input data
            skipped_self_loops: Number of self-loop lines dropped while loading

        Raises:
            GraphError: On self-loops, out-of-range nodes or bad probabilities
        """
        if node_count < 1:
            raise GraphError(f"A network needs at least one node, got {node_count}")

        self.node_count = node_count
        self.labels: tuple[str, ...] = (
            tuple(str(label) for label in labels) if labels is not None
            else tuple(str(i) for i in range(node_count))
        )
        if len(self.labels) != node_count:
            raise GraphError(f"Expected {node_count} labels, got {len(self.labels)}")
        if len(set(self.labels)) != node_count:
            raise GraphError("Node labels must be unique")

        self.explicit_probabilities = explicit_probabilities
        self.skipped_self_loops = skipped_self_loops

        ordered = sorted(edges.items())
        for (u, v), p in ordered:
            if u == v:
                raise GraphError(f"Self-loop on node {u} is not allowed")
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise GraphError(f"Edge ({u}, {v}) references a node outside 0..{node_count - 1}")
            if not 0.0 <= p <= 1.0:
                raise GraphError(f"Edge ({u}, {v}) has probability {p} outside [0, 1]")

        self.sources = np.array([u for (u, _), _ in ordered], dtype=np.int64)
        self.targets = np.array([v for (_, v), _ in ordered], dtype=np.int64)
        self.probs = np.array([p for _, p in ordered], dtype=np.float64)
        for array in (self.sources, self.targets, self.probs):
            array.flags.writeable = False

        self._edge_index: dict[tuple[int, int], int] = {
            edge: eid for eid, (edge, _) in enumerate(ordered)
        }

        # CSR over out-edges; edge ids are already grouped by source.
        counts = np.bincount(self.sources, minlength=node_count)
        self.out_ptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.out_ptr.flags.writeable = False

        self._in_edges: list[list[int]] = [[] for _ in range(node_count)]
        for eid, v in enumerate(self.targets.tolist()):
            self._in_edges[v].append(eid)

    # ========================================================================
    # Basic Queries
    # ========================================================================

    @property
    def edge_count(self) -> int:
        """Number of directed edges."""
        return len(self.probs)

    def __repr__(self) -> str:
        return f"IcNetwork(nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IcNetwork):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.labels == other.labels
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.probs, other.probs)
        )

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Iterate over (u, v, probability) in edge-id order."""
        yield from zip(self.sources.tolist(), self.targets.tolist(), self.probs.tolist())

    def labeled_edges(self) -> dict[tuple[str, str], float]:
        """Edges keyed by node labels; independent of index assignment."""
        return {
            (self.labels[u], self.labels[v]): p
            for u, v, p in self.edges()
        }

    def edge_id(self, u: int, v: int) -> Optional[int]:
        """Edge id of (u, v), or None if the edge does not exist."""
        return self._edge_index.get((u, v))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edge_index

    def probability(self, u: int, v: int) -> float:
        """
        Propagation probability of edge (u, v).

        Raises:
            GraphError: If the edge does not exist
        """
        eid = self._edge_index.get((u, v))
        if eid is None:
            raise GraphError(f"No edge ({u}, {v})")
        return float(self.probs[eid])

    def out_edge_ids(self, u: int) -> range:
        return range(int(self.out_ptr[u]), int(self.out_ptr[u + 1]))

    def in_edge_ids(self, v: int) -> list[int]:
        return list(self._in_edges[v])

    def out_neighbors(self, u: int) -> list[int]:
        return self.targets[self.out_ptr[u]:self.out_ptr[u + 1]].tolist()

    def in_neighbors(self, v: int) -> list[int]:
        return [int(self.sources[eid]) for eid in self._in_edges[v]]

    def in_degree(self, v: int) -> int:
        return len(self._in_edges[v])

    @cached_property
    def length_out(self) -> list[list[tuple[int, int, float]]]:
        """Per node, (target, edge id, -ln p) for out-edges with p > 0."""
        adjacency: list[list[tuple[int, int, float]]] = [[] for _ in range(self.node_count)]
        for eid, (u, v, p) in enumerate(self.edges()):
            if p > 0.0:
                adjacency[u].append((v, eid, -math.log(p)))
        return adjacency

    @cached_property
    def length_in(self) -> list[list[tuple[int, int, float]]]:
        """Per node, (source, edge id, -ln p) for in-edges with p > 0."""
        adjacency: list[list[tuple[int, int, float]]] = [[] for _ in range(self.node_count)]
        for u, entries in enumerate(self.length_out):
            for v, eid, length in entries:
                adjacency[v].append((u, eid, length))
        return adjacency

    # ========================================================================
    # Identifier Map
    # ========================================================================

    @cached_property
    def _label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def index_of(self, label: str) -> int:
        """
        Resolve an external identifier to its node index.

        Raises:
            UnknownNodeError: If the identifier is not in the network
        """
        try:
            return self._label_index[str(label)]
        except KeyError:
            raise UnknownNodeError(f"Unknown node identifier '{label}'") from None

    def label(self, u: int) -> str:
        return self.labels[u]

    # ========================================================================
    # Derived Networks
    # ========================================================================

    def with_probabilities(self, probs: Sequence[float], explicit: bool = False) -> "IcNetwork":
        """Copy of this network with one probability per edge id."""
        if len(probs) != self.edge_count:
            raise GraphError(f"Expected {self.edge_count} probabilities, got {len(probs)}")
        edges = {
            (u, v): float(p)
            for (u, v, _), p in zip(self.edges(), probs)
        }
        return IcNetwork(
            self.node_count,
            edges,
            labels=self.labels,
            explicit_probabilities=explicit,
            skipped_self_loops=self.skipped_self_loops,
        )

    def induced_edges(self, nodes: Iterable[int]) -> list[int]:
        """Edge ids of the subgraph induced on ``nodes``."""
        members = set(nodes)
        return [
            eid
            for u in sorted(members)
            for eid in self.out_edge_ids(u)
            if int(self.targets[eid]) in members
        ]


# ============================================================================
# Activation State
# ============================================================================

class ActivationState:
    """
    Binary activation vector over the nodes of a network.

    X1 (``active``) and X0 (``inactive``) are kept as sorted tuples.
    """

    def __init__(self, bits: Sequence[int] | np.ndarray):
        array = np.asarray(bits)
        if array.ndim != 1 or array.size == 0:
            raise ArgumentError("An activation state must be a non-empty vector")
        if not np.isin(array, (0, 1)).all():
            raise ArgumentError("Activation bits must be 0 or 1")
        self.bits = array.astype(bool)
        self.bits.flags.writeable = False

    @classmethod
    def from_active(cls, node_count: int, active: Iterable[int]) -> "ActivationState":
        bits = np.zeros(node_count, dtype=bool)
        for u in active:
            if not 0 <= u < node_count:
                raise ArgumentError(f"Active node {u} outside 0..{node_count - 1}")
            bits[u] = True
        return cls(bits)

    @property
    def node_count(self) -> int:
        return int(self.bits.size)

    @cached_property
    def active(self) -> tuple[int, ...]:
        return tuple(np.flatnonzero(self.bits).tolist())

    @cached_property
    def inactive(self) -> tuple[int, ...]:
        return tuple(np.flatnonzero(~self.bits).tolist())

    @property
    def n1(self) -> int:
        return len(self.active)

    def is_active(self, u: int) -> bool:
        return bool(self.bits[u])

    def check_network(self, net: IcNetwork) -> None:
        """
        Raises:
            ArgumentError: If the state length differs from the network size
        """
        if self.node_count != net.node_count:
            raise ArgumentError(
                f"Activation state has {self.node_count} entries, network has {net.node_count} nodes"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActivationState):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        return f"ActivationState(n={self.node_count}, active={self.n1})"


# ============================================================================
# Probability Models
# ============================================================================

class ProbabilityKind(str, Enum):
    UNIFORM = "uniform"
    WEIGHTED_CASCADE = "wc"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class ProbabilityModel:
    kind: ProbabilityKind
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind == ProbabilityKind.UNIFORM:
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ArgumentError(f"Uniform probability must be in [0, 1], got {self.p}")

    @classmethod
    def uniform(cls, p: float) -> "ProbabilityModel":
        return cls(ProbabilityKind.UNIFORM, p)

    @classmethod
    def weighted_cascade(cls) -> "ProbabilityModel":
        return cls(ProbabilityKind.WEIGHTED_CASCADE)

    @classmethod
    def explicit(cls) -> "ProbabilityModel":
        return cls(ProbabilityKind.EXPLICIT)

    def __str__(self) -> str:
        if self.kind == ProbabilityKind.UNIFORM:
            return f"uniform:{self.p}"
        return self.kind.value


def assign_probabilities(net: IcNetwork, model: ProbabilityModel) -> IcNetwork:
    """
    Return a copy of ``net`` with probabilities set by ``model``.

    Uniform(p) gives every edge p. Weighted cascade gives (u, v) the value
    1/indeg(v), counting distinct in-neighbours. Explicit keeps the loaded
    probabilities and requires that every edge had one.

    Raises:
        GraphError: For Explicit when the network has no loaded probabilities
    """
    if model.kind == ProbabilityKind.UNIFORM:
        return net.with_probabilities([model.p] * net.edge_count)

    if model.kind == ProbabilityKind.WEIGHTED_CASCADE:
        probs = [1.0 / net.in_degree(v) for v in net.targets.tolist()]
        return net.with_probabilities(probs)

    if not net.explicit_probabilities:
        raise GraphError("Explicit probability model requires a probability on every edge line")
    return net


# ============================================================================
# Queries Used by the Detectors
# ============================================================================

def parents_within(net: IcNetwork, u: int, restrict: Iterable[int]) -> set[int]:
    """
    In-neighbours of ``u`` that lie inside ``restrict``.

    Raises:
        ArgumentError: If ``u`` is not in ``restrict``
    """
    members = restrict if isinstance(restrict, (set, frozenset)) else set(restrict)
    if u not in members:
        raise ArgumentError(f"Node {u} is not in the restricting set")
    return {v for v in net.in_neighbors(u) if v in members}


# ============================================================================
# Edge-List Text Format
# ============================================================================

def load_edge_list(lines: Iterable[str], undirected: bool = False) -> IcNetwork:
    """
    Parse an edge list into a network.

    Each non-comment line holds ``<src> <dst>`` or ``<src> <dst> <prob>``.
    A ``# node <id>`` comment declares a node without adding edges.
    Identifiers get dense indices in first-appearance order. Duplicate pairs
    keep their first occurrence; self-loops are skipped and counted.

    Args:
        lines: Line stream (file object or list of strings)
        undirected: Expand every pair into both directed edges

    Returns:
        The parsed network (probabilities 0 unless given on every line)

    Raises:
        EdgeListParseError: On lines without 2 or 3 tokens or with a bad probability
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: dict[tuple[int, int], float] = {}
    self_loops = 0
    all_explicit = True
    saw_edge = False

    def node(token: str) -> int:
        if token not in index:
            index[token] = len(labels)
            labels.append(token)
        return index[token]

    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            directive = line[1:].split()
            if len(directive) == 2 and directive[0] == "node":
                node(directive[1])
            continue

        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise EdgeListParseError(line_number, f"expected 2 or 3 fields, got {len(tokens)}")

        prob = 0.0
        if len(tokens) == 3:
            try:
                prob = float(tokens[2])
            except ValueError:
                raise EdgeListParseError(line_number, f"invalid probability '{tokens[2]}'") from None
            if not 0.0 <= prob <= 1.0:
                raise EdgeListParseError(line_number, f"probability {prob} outside [0, 1]")
        else:
            all_explicit = False

        if tokens[0] == tokens[1]:
            node(tokens[0])
            self_loops += 1
            continue

        u, v = node(tokens[0]), node(tokens[1])
        saw_edge = True
        edges.setdefault((u, v), prob)
        if undirected:
            edges.setdefault((v, u), prob)

    if self_loops:
        logger.warning("Skipped %d self-loop line(s)", self_loops)
    if not labels:
        raise GraphError("Edge list contains no nodes")

    return IcNetwork(
        len(labels),
        edges,
        labels=labels,
        explicit_probabilities=saw_edge and all_explicit,
        skipped_self_loops=self_loops,
    )


def format_edge_list(net: IcNetwork, edge_ids: Optional[Iterable[int]] = None) -> str:
    """
    Serialize edges as ``<src> <dst> <prob>`` lines using node labels.

    Probabilities are written with ``repr`` so reloading is exact. For the
    whole network, ``# node <id>`` lines come first when the edges alone
    would not reproduce the node indices (isolated nodes, or an index order
    that differs from first appearance).
    """
    selected = range(net.edge_count) if edge_ids is None else sorted(edge_ids)
    lines = [
        f"{net.labels[int(net.sources[eid])]} {net.labels[int(net.targets[eid])]} {float(net.probs[eid])!r}"
        for eid in selected
    ]
    if edge_ids is None:
        appearance = dict.fromkeys(
            node for u, v in zip(net.sources.tolist(), net.targets.tolist()) for node in (u, v)
        )
        if list(appearance) != list(range(net.node_count)):
            lines = [f"# node {label}" for label in net.labels] + lines
    return "\n".join(lines) + ("\n" if lines else "")
