"""
Influence distances on IC networks.

The maximum diffusion path from u to v is a shortest path under edge
length -ln Pr[e]. The k-th influence distance combines k greedily chosen
edge-disjoint maximum diffusion paths. Distances are extended reals; math.inf
marks "no path with positive probability".
"""

import heapq
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from effector.errors import ArgumentError, UnknownNodeError
from effector.graph import ActivationState, IcNetwork

logger = logging.getLogger(__name__)

INF = math.inf


# ============================================================================
# Paths
# ============================================================================

@dataclass(frozen=True)
class DiffusionPath:
    """A simple directed path; ``length`` is -ln of its propagation probability."""

    nodes: tuple[int, ...]
    edges: tuple[int, ...]
    length: float

    @property
    def probability(self) -> float:
        return math.exp(-self.length)

    @property
    def hops(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class PathSet:
    source: int
    target: int
    paths: tuple[DiffusionPath, ...] = ()

    @property
    def probabilities(self) -> list[float]:
        return [path.probability for path in self.paths]

    def is_edge_disjoint(self) -> bool:
        seen: set[int] = set()
        for path in self.paths:
            if seen.intersection(path.edges):
                return False
            seen.update(path.edges)
        return True


# ============================================================================
# Shortest Paths
# ============================================================================

class _SearchTree:
    """Dijkstra result: distance, hop count and predecessor edge per node."""

    def __init__(self, node_count: int, source: int):
        self.source = source
        self.dist = [INF] * node_count
        self.hops = [-1] * node_count
        self.pred = [-1] * node_count
        self.pred_edge = [-1] * node_count
        self.dist[source] = 0.0
        self.hops[source] = 0

    def reached(self, node: int) -> bool:
        return self.hops[node] >= 0

    def path_to(self, target: int) -> Optional[DiffusionPath]:
        if not self.reached(target):
            return None
        nodes = [target]
        edges = []
        current = target
        while current != self.source:
            edges.append(self.pred_edge[current])
            current = self.pred[current]
            nodes.append(current)
        nodes.reverse()
        edges.reverse()
        return DiffusionPath(tuple(nodes), tuple(edges), self.dist[target])


def _dijkstra(
    net: IcNetwork,
    source: int,
    target: Optional[int] = None,
    removed: frozenset[int] | set[int] = frozenset(),
) -> _SearchTree:
    """
    Shortest paths from ``source`` under lengths -ln Pr[e].

    Edges with probability 0 and edges in ``removed`` are skipped. Ties go to
    fewer hops, then to the lower predecessor index. Stops early once
    ``target`` is settled.
    """
    tree = _SearchTree(net.node_count, source)
    dist, hops, pred, pred_edge = tree.dist, tree.hops, tree.pred, tree.pred_edge
    adjacency = net.length_out
    settled = bytearray(net.node_count)
    heap = [(0.0, 0, source)]

    while heap:
        d, h, node = heapq.heappop(heap)
        if settled[node]:
            continue
        settled[node] = 1
        if node == target:
            break

        for succ, eid, length in adjacency[node]:
            if settled[succ] or eid in removed:
                continue
            candidate = d + length
            if hops[succ] < 0 or (candidate, h + 1, node) < (dist[succ], hops[succ], pred[succ]):
                dist[succ] = candidate
                hops[succ] = h + 1
                pred[succ] = node
                pred_edge[succ] = eid
                heapq.heappush(heap, (candidate, h + 1, succ))

    return tree


class _RepairSearch:
    """
    Searches from one source on the network minus a set of removed edges.

    Removing edges never shortens a label, so a node keeps its full-graph
    label unless its tree path lost an edge. Those nodes are the subtrees
    below the removed tree edges; only they are searched again, seeded from
    the unchanged labels around them. Labels and tie-breaks match a fresh
    ``_dijkstra`` with the same ``removed`` set.
    """

    def __init__(self, net: IcNetwork, source: int, edge_targets: Sequence[int]):
        self.net = net
        self.source = source
        self.tree = _dijkstra(net, source)
        self._edge_targets = edge_targets
        self._regions: dict[tuple[int, ...], tuple[bytearray, list[tuple[int, list]]]] = {}

        tree = self.tree
        children: list[list[int]] = [[] for _ in range(net.node_count)]
        for v in range(net.node_count):
            if v != source and tree.reached(v):
                children[tree.pred[v]].append(v)

        # preorder, so every subtree is one slice of _order
        self._order: list[int] = []
        self._enter = [0] * net.node_count
        self._size = [1] * net.node_count
        stack = [source]
        while stack:
            node = stack.pop()
            self._enter[node] = len(self._order)
            self._order.append(node)
            stack.extend(reversed(children[node]))
        for node in reversed(self._order):
            if node != source:
                self._size[tree.pred[node]] += self._size[node]

    def _cut_roots(self, removed: set[int]) -> tuple[int, ...]:
        """Outermost nodes whose tree edge is removed."""
        pred_edge = self.tree.pred_edge
        roots = sorted(
            (self._enter[x], x)
            for x in (self._edge_targets[eid] for eid in removed)
            if pred_edge[x] >= 0 and pred_edge[x] in removed
        )
        top: list[int] = []
        end = -1
        for start, x in roots:
            if start >= end:
                top.append(x)
                end = start + self._size[x]
        return tuple(top)

    def _region(self, roots: tuple[int, ...]) -> tuple[bytearray, list[tuple[int, list]]]:
        region = self._regions.get(roots)
        if region is not None:
            return region

        tree = self.tree
        inside = bytearray(self.net.node_count)
        members = []
        for x in roots:
            start = self._enter[x]
            for z in self._order[start:start + self._size[x]]:
                inside[z] = 1
                members.append(z)

        seeds = []
        length_in = self.net.length_in
        for z in members:
            options = sorted(
                (tree.dist[y] + length, tree.hops[y] + 1, y, eid)
                for y, eid, length in length_in[z]
                if not inside[y] and tree.reached(y)
            )
            if options:
                seeds.append((z, options))

        region = (inside, seeds)
        self._regions[roots] = region
        return region

    def path_avoiding(self, target: int, removed: set[int]) -> Optional[DiffusionPath]:
        """Maximum diffusion path to ``target`` that uses no edge in ``removed``."""
        tree = self.tree
        if not tree.reached(target):
            return None
        roots = self._cut_roots(removed)
        if not roots:
            return tree.path_to(target)
        inside, seeds = self._region(roots)
        if not inside[target]:
            return tree.path_to(target)

        dist: dict[int, float] = {}
        hops: dict[int, int] = {}
        pred: dict[int, int] = {}
        pred_edge: dict[int, int] = {}
        heap = []
        for z, options in seeds:
            for d, h, y, eid in options:
                if eid not in removed:
                    dist[z], hops[z], pred[z], pred_edge[z] = d, h, y, eid
                    heap.append((d, h, z))
                    break
        heapq.heapify(heap)

        adjacency = self.net.length_out
        settled: set[int] = set()
        while heap:
            d, h, node = heapq.heappop(heap)
            if node in settled:
                continue
            settled.add(node)
            if node == target:
                break

            for succ, eid, length in adjacency[node]:
                if not inside[succ] or succ in settled or eid in removed:
                    continue
                candidate = d + length
                best = dist.get(succ)
                if best is None or (candidate, h + 1, node) < (best, hops[succ], pred[succ]):
                    dist[succ], hops[succ], pred[succ], pred_edge[succ] = candidate, h + 1, node, eid
                    heapq.heappush(heap, (candidate, h + 1, succ))

        if target not in dist:
            return None
        nodes = []
        edges = []
        current = target
        while inside[current]:
            nodes.append(current)
            edges.append(pred_edge[current])
            current = pred[current]
        prefix = tree.path_to(current)
        return DiffusionPath(
            prefix.nodes + tuple(reversed(nodes)),
            prefix.edges + tuple(reversed(edges)),
            dist[target],
        )

    def _exhausted(self, target: int, removed: set[int]) -> bool:
        length_out = self.net.length_out[self.source]
        length_in = self.net.length_in[target]
        return (
            all(eid in removed for _, eid, _ in length_out)
            or all(eid in removed for _, eid, _ in length_in)
        )

    def path_set(self, target: int, k: int) -> tuple[DiffusionPath, ...]:
        """Up to k greedy edge-disjoint maximum diffusion paths to ``target``."""
        first = self.tree.path_to(target)
        if first is None:
            return ()
        paths = [first]
        removed = set(first.edges)
        while len(paths) < k and not self._exhausted(target, removed):
            path = self.path_avoiding(target, removed)
            if path is None:
                break
            paths.append(path)
            removed.update(path.edges)
        return tuple(paths)


def max_diffusion_path(
    net: IcNetwork,
    u: int,
    v: int,
    removed: frozenset[int] | set[int] = frozenset(),
) -> Optional[DiffusionPath]:
    """
    Path from u to v with the largest product of edge probabilities.

    Args:
        net: The network
        u: Source node
        v: Target node
        removed: Edge ids to ignore

    Returns:
        The path, the empty path when u == v, or None if v is unreachable
    """
    if u == v:
        return DiffusionPath((u,), (), 0.0)
    return _dijkstra(net, u, target=v, removed=removed).path_to(v)


def k_max_path_set(net: IcNetwork, u: int, v: int, k: int) -> PathSet:
    """
    Up to k edge-disjoint maximum diffusion paths, found greedily.

    Each round takes the maximum diffusion path of the current graph and
    removes its edges before the next round.

    Raises:
        ArgumentError: If k < 1
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if u == v:
        return PathSet(u, v, (DiffusionPath((u,), (), 0.0),))
    first = max_diffusion_path(net, u, v)
    return PathSet(u, v, _extend_paths(net, u, v, first, k))


def _extend_paths(
    net: IcNetwork,
    u: int,
    v: int,
    first: Optional[DiffusionPath],
    k: int,
) -> tuple[DiffusionPath, ...]:
    if first is None:
        return ()
    paths = [first]
    removed = set(first.edges)
    while len(paths) < k:
        path = max_diffusion_path(net, u, v, removed=removed)
        if path is None:
            break
        paths.append(path)
        removed.update(path.edges)
    return tuple(paths)


def distance_from_lengths(lengths: Sequence[float]) -> float:
    """
    -ln(1 - prod(1 - P_i)) for path probabilities P_i = exp(-length_i).

    Evaluated in log space so long paths with tiny probabilities keep a
    finite distance.
    """
    if not lengths:
        return INF
    if len(lengths) == 1:
        return float(lengths[0])
    if min(lengths) == 0.0:
        return 0.0

    log_miss = sum(math.log1p(-math.exp(-length)) for length in lengths)
    if log_miss == 0.0:
        # every exp(-length) underflows; 1 - prod(1 - P) ~= sum(P)
        return -float(np.logaddexp.reduce([-length for length in lengths]))
    return -math.log(-math.expm1(log_miss))


def influence_distance(pathset: PathSet) -> float:
    """k-th influence distance induced by a path set; +inf when it is empty."""
    return distance_from_lengths([path.length for path in pathset.paths])


# ============================================================================
# Distance Tables
# ============================================================================

@dataclass
class DistanceTable:
    """d^k(u, v) for u in ``sources`` and v in ``targets``."""

    k: int
    sources: tuple[int, ...]
    targets: tuple[int, ...]
    values: np.ndarray
    paths: Optional[dict[tuple[int, int], PathSet]] = field(default=None, repr=False)

    def __post_init__(self):
        self._row = {u: i for i, u in enumerate(self.sources)}
        self._col = {v: j for j, v in enumerate(self.targets)}

    def distance(self, u: int, v: int) -> float:
        """
        Raises:
            UnknownNodeError: If the pair is outside the table
        """
        try:
            return float(self.values[self._row[u], self._col[v]])
        except KeyError:
            raise UnknownNodeError(f"Pair ({u}, {v}) is not covered by the distance table") from None

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Copy of the block rows x cols, in the given orders."""
        try:
            r = [self._row[u] for u in rows]
            c = [self._col[v] for v in cols]
        except KeyError as e:
            raise UnknownNodeError(f"Node {e.args[0]} is not covered by the distance table") from None
        return self.values[np.ix_(r, c)]

    def set_to_node(self, nodes: Iterable[int], u: int) -> float:
        """Sum of d(v, u) over v in ``nodes``."""
        return float(sum(self.distance(v, u) for v in nodes))

    def node_to_set(self, u: int, nodes: Iterable[int]) -> float:
        """Sum of d(u, v) over v in ``nodes``."""
        return float(sum(self.distance(u, v) for v in nodes))

    def set_to_set(self, first: Iterable[int], second: Iterable[int]) -> float:
        """Sum of d(u, v) over u in ``first`` and v in ``second``."""
        first, second = list(first), list(second)
        if not first or not second:
            return 0.0
        return float(self.submatrix(first, second).sum())

    def rows(self) -> Iterable[tuple[int, int, float]]:
        for i, u in enumerate(self.sources):
            for j, v in enumerate(self.targets):
                yield u, v, float(self.values[i, j])


def _fill_rows(
    net: IcNetwork,
    sources: tuple[int, ...],
    targets: tuple[int, ...],
    k: int,
    keep_paths: bool,
) -> tuple[np.ndarray, Optional[dict[tuple[int, int], PathSet]]]:
    values = np.full((len(sources), len(targets)), INF)
    paths: Optional[dict[tuple[int, int], PathSet]] = {} if keep_paths else None

    edge_targets = net.targets.tolist()
    for i, u in enumerate(sources):
        search = _RepairSearch(net, u, edge_targets)
        tree = search.tree
        for j, v in enumerate(targets):
            if u == v:
                values[i, j] = 0.0
                if paths is not None:
                    paths[(u, v)] = PathSet(u, v, (DiffusionPath((u,), (), 0.0),))
                continue
            if not tree.reached(v):
                if paths is not None:
                    paths[(u, v)] = PathSet(u, v)
                continue
            if k == 1 and paths is None:
                values[i, j] = tree.dist[v]
                continue
            found = search.path_set(v, k)
            values[i, j] = distance_from_lengths([path.length for path in found])
            if paths is not None:
                paths[(u, v)] = PathSet(u, v, found)

    return values, paths


def _fill_rows_worker(args):
    return _fill_rows(*args)


def distance_table(
    net: IcNetwork,
    sources: Iterable[int],
    targets: Iterable[int],
    k: int = 1,
    keep_paths: bool = False,
    workers: int = 1,
) -> DistanceTable:
    """
    Fill d^k(u, v) for every u in ``sources`` and v in ``targets``.

    One single-source search per source yields the first path to every
    target. For k > 1 each reachable pair then gets up to k - 1 further
    searches with earlier paths removed; these only revisit the part of the
    search tree cut off by the removed edges.

    Args:
        net: The network
        sources: Source nodes
        targets: Target nodes
        k: Number of edge-disjoint paths per pair
        keep_paths: Also store the PathSet of every pair
        workers: Processes to split the sources over (rows are independent)

    Returns:
        The filled table (d(u, u) = 0)
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if workers < 1:
        raise ArgumentError(f"workers must be >= 1, got {workers}")
    sources = tuple(dict.fromkeys(int(u) for u in sources))
    targets = tuple(dict.fromkeys(int(v) for v in targets))
    for node in sources + targets:
        if not 0 <= node < net.node_count:
            raise UnknownNodeError(f"Node {node} is not in the network")

    if workers == 1 or len(sources) < 2:
        values, paths = _fill_rows(net, sources, targets, k, keep_paths)
    else:
        chunks = [
            tuple(int(u) for u in chunk)
            for chunk in np.array_split(np.array(sources, dtype=np.int64), min(workers, len(sources)))
        ]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_fill_rows_worker, [(net, chunk, targets, k, keep_paths) for chunk in chunks]))
        values = np.vstack([part for part, _ in parts])
        paths = None
        if keep_paths:
            paths = {}
            for _, part_paths in parts:
                paths.update(part_paths)

    logger.debug("Distance table k=%d: %d x %d", k, len(sources), len(targets))
    return DistanceTable(k, sources, targets, values, paths)


def table_for_state(net: IcNetwork, state: ActivationState, k: int = 1, workers: int = 1) -> DistanceTable:
    """Table with sources X1 and targets V, as the detectors need."""
    state.check_network(net)
    return distance_table(net, state.active, range(net.node_count), k, workers=workers)


# ============================================================================
# Effector Objective
# ============================================================================

def scaled(factor: float, value: float) -> float:
    """factor * value with 0 * inf taken as 0."""
    return 0.0 if factor == 0 else factor * value


def objective_g(
    state: ActivationState,
    members: Iterable[int],
    lam: float,
    table: DistanceTable,
) -> float:
    """
    g_k(S) = lam * d(S, X1 \\ S) + (1 - lam) * d(X1 \\ S, X0) for the table's k.

    Raises:
        ArgumentError: If S is not a subset of X1 or lam is outside [0, 1]
    """
    if not 0.0 <= lam <= 1.0:
        raise ArgumentError(f"lambda must be in [0, 1], got {lam}")
    chosen = set(members)
    active = set(state.active)
    if not chosen <= active:
        raise ArgumentError(f"Nodes {sorted(chosen - active)} are not active")
    rest = sorted(active - chosen)
    return (
        scaled(lam, table.set_to_set(sorted(chosen), rest))
        + scaled(1.0 - lam, table.set_to_set(rest, state.inactive))
    )
