"""
Matching-based effector detection for the 1-IDBED problem.

For every ordered anchor pair (u, v) of active nodes a complete bipartite
instance is built whose minimum perfect matching picks a candidate set V'.
The candidate with the smallest selection score wins.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from effector.distance import DistanceTable, objective_g, scaled, table_for_state
from effector.errors import ArgumentError, MatchingInfeasibleError
from effector.graph import ActivationState, IcNetwork
from effector.models import Algorithm, EffectorResult

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.5


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class BipartiteInstance:
    """
    Weight matrix of the bipartite graph for anchors (u, v).

    Row r stands for active node ``rows[r]``. Columns 0..B-1 carry
    lam*(N1-B)*d(w, u); columns B..N1-1 carry lam*B*d(v, w) + (1-lam)*d(w, X0).
    """

    anchor_u: int
    anchor_v: int
    rows: tuple[int, ...]
    budget: int
    lam: float
    anchor_distance: float
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class MatchingResult:
    assignment: tuple[int, ...]
    matched_set: frozenset[int]
    weight: float
    selection_score: float


# ============================================================================
# Objective
# ============================================================================

def _check_table(table: DistanceTable) -> None:
    if table.k != 1:
        raise ArgumentError(f"MBED needs first influence distances, got a k={table.k} table")


def objective_g1(
    state: ActivationState,
    members: Iterable[int],
    lam: float,
    table: DistanceTable,
) -> float:
    """g1(S) = lam * d1(S, X1 \\ S) + (1 - lam) * d1(X1 \\ S, X0)."""
    _check_table(table)
    return objective_g(state, members, lam, table)


def selection_score(
    state: ActivationState,
    members: Iterable[int],
    u: int,
    v: int,
    lam: float,
    table: DistanceTable,
) -> float:
    """
    Score of a candidate set under anchors (u, v), from raw distances.

    lam*(N1-B)*d1(V', u) + lam*B*d1(v, X1 \\ V') + (1-lam)*d1(X1 \\ V', X0)
    + lam*B*(N1-B)*d1(u, v), where B = |V'|.
    """
    _check_table(table)
    chosen = sorted(set(members))
    rest = sorted(set(state.active) - set(chosen))
    budget, n1 = len(chosen), state.n1
    return (
        scaled(lam * (n1 - budget), table.set_to_node(chosen, u))
        + scaled(lam * budget, table.node_to_set(v, rest))
        + scaled(1.0 - lam, table.set_to_set(rest, state.inactive))
        + scaled(lam * budget * (n1 - budget), table.distance(u, v))
    )


# ============================================================================
# Bipartite Construction
# ============================================================================

def _scaled_array(factor: float, values: np.ndarray) -> np.ndarray:
    if factor == 0:
        return np.zeros_like(values, dtype=np.float64)
    return factor * values


def _inactive_distance(state: ActivationState, table: DistanceTable) -> np.ndarray:
    if not state.inactive:
        return np.zeros(state.n1)
    return table.submatrix(state.active, state.inactive).sum(axis=1)


def _instance(
    rows: tuple[int, ...],
    active_distance: np.ndarray,
    inactive_distance: np.ndarray,
    i: int,
    j: int,
    budget: int,
    lam: float,
) -> BipartiteInstance:
    n1 = len(rows)
    left = _scaled_array(lam * (n1 - budget), active_distance[:, i])
    right = (
        _scaled_array(lam * budget, active_distance[j, :])
        + _scaled_array(1.0 - lam, inactive_distance)
    )
    weights = np.empty((n1, n1))
    weights[:, :budget] = left[:, np.newaxis]
    weights[:, budget:] = right[:, np.newaxis]
    return BipartiteInstance(
        anchor_u=rows[i],
        anchor_v=rows[j],
        rows=rows,
        budget=budget,
        lam=lam,
        anchor_distance=float(active_distance[i, j]),
        weights=weights,
    )


def _check_budget(state: ActivationState, budget: int) -> None:
    if not 1 <= budget < state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1 - 1} for the matching, got {budget}")


def _check_lambda(lam: float) -> None:
    if not 0.0 <= lam <= 1.0:
        raise ArgumentError(f"lambda must be in [0, 1], got {lam}")


def build_bipartite(
    state: ActivationState,
    u: int,
    v: int,
    budget: int,
    lam: float,
    table: DistanceTable,
) -> BipartiteInstance:
    """
    Build the bipartite instance for anchors (u, v).

    Raises:
        ArgumentError: If u or v is inactive or the budget is not in 1..N1-1
    """
    _check_table(table)
    _check_budget(state, budget)
    _check_lambda(lam)
    rows = state.active
    index = {w: r for r, w in enumerate(rows)}
    for anchor in (u, v):
        if anchor not in index:
            raise ArgumentError(f"Anchor {anchor} is not active")
    active_distance = table.submatrix(rows, rows)
    return _instance(
        rows, active_distance, _inactive_distance(state, table),
        index[u], index[v], budget, lam,
    )


# ============================================================================
# Matching
# ============================================================================

def solve_assignment(cost: np.ndarray) -> np.ndarray:
    """
    Column assigned to each row by a minimum-weight perfect matching.

    +inf entries are forbidden assignments.

    Raises:
        MatchingInfeasibleError: If every perfect matching uses a +inf entry
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ArgumentError(f"Cost matrix must be square, got shape {cost.shape}")
    try:
        _, cols = linear_sum_assignment(cost)
    except ValueError as e:
        raise MatchingInfeasibleError(f"No finite perfect matching: {e}") from None
    return cols


def min_perfect_matching(inst: BipartiteInstance) -> MatchingResult:
    """
    Solve the instance and score its matched set.

    Raises:
        MatchingInfeasibleError: If no finite perfect matching exists
    """
    cols = solve_assignment(inst.weights)
    weight = float(inst.weights[np.arange(inst.size), cols].sum())
    matched = frozenset(w for w, col in zip(inst.rows, cols.tolist()) if col < inst.budget)
    penalty = scaled(inst.lam * inst.budget * (inst.size - inst.budget), inst.anchor_distance)
    return MatchingResult(
        assignment=tuple(cols.tolist()),
        matched_set=matched,
        weight=weight,
        selection_score=weight + penalty,
    )


# ============================================================================
# Detector
# ============================================================================

def _fallback(rows: tuple[int, ...], active_distance: np.ndarray, budget: int) -> frozenset[int]:
    # nodes closest to the rest of X1
    row_sums = active_distance.sum(axis=1)
    order = sorted(range(len(rows)), key=lambda r: (row_sums[r], rows[r]))
    return frozenset(rows[r] for r in order[:budget])


def mbed(
    net: IcNetwork,
    state: ActivationState,
    budget: int,
    lam: float = DEFAULT_LAMBDA,
    table: Optional[DistanceTable] = None,
) -> EffectorResult:
    """
    Detect ``budget`` effectors by scanning all anchor pairs.

    Args:
        net: The network
        state: Observed activation state
        budget: Number of effectors B (1..N1)
        lam: Trade-off between the two objective terms
        table: k=1 distances from X1 to V (computed when omitted)

    Returns:
        The candidate with the smallest selection score; ties go to the
        lowest (u, v) pair

    Raises:
        ArgumentError: If the budget is outside 1..N1 or lam outside [0, 1]
    """
    state.check_network(net)
    _check_lambda(lam)
    if not 1 <= budget <= state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1}, got {budget}")

    if budget == state.n1:
        return EffectorResult(
            members=frozenset(state.active), budget=budget, algorithm=Algorithm.MBED,
            score=0.0, details={"g1": 0.0},
        )

    if table is None:
        table = table_for_state(net, state, k=1)
    _check_table(table)

    rows = state.active
    active_distance = table.submatrix(rows, rows)
    inactive_distance = _inactive_distance(state, table)

    best: Optional[tuple[float, int, int, MatchingResult]] = None
    skipped = 0
    for i in range(len(rows)):
        for j in range(len(rows)):
            if i == j:
                continue
            inst = _instance(rows, active_distance, inactive_distance, i, j, budget, lam)
            try:
                match = min_perfect_matching(inst)
            except MatchingInfeasibleError:
                skipped += 1
                continue
            if best is None or match.selection_score < best[0]:
                best = (match.selection_score, rows[i], rows[j], match)

    logger.debug("MBED scanned %d pairs, %d infeasible", len(rows) * (len(rows) - 1), skipped)

    if best is None:
        logger.warning("No anchor pair has a finite matching; falling back to row sums")
        members = _fallback(rows, active_distance, budget)
        g1 = objective_g1(state, members, lam, table)
        return EffectorResult(
            members=members, budget=budget, algorithm=Algorithm.MBED, score=g1,
            notes="fallback: smallest distance to the other active nodes",
            details={"g1": g1, "pairs_skipped": skipped},
        )

    score, u, v, match = best
    return EffectorResult(
        members=match.matched_set,
        budget=budget,
        algorithm=Algorithm.MBED,
        score=score,
        details={
            "anchors": (u, v),
            "matching_weight": match.weight,
            "g1": objective_g1(state, match.matched_set, lam, table),
            "pairs_skipped": skipped,
        },
    )
