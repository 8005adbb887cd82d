"""Comparison detectors: out-degree ranking and uniform random choice."""

import numpy as np

from effector.errors import ArgumentError
from effector.graph import ActivationState, IcNetwork
from effector.models import Algorithm, EffectorResult

OUTDEGREE_NOTE = "out-degree within the subgraph induced on the active nodes"


def _check_budget(state: ActivationState, budget: int) -> None:
    if not 1 <= budget <= state.n1:
        raise ArgumentError(f"Budget must be in 1..{state.n1}, got {budget}")


def induced_out_degrees(net: IcNetwork, state: ActivationState) -> dict[int, int]:
    """Number of active out-neighbours of every active node."""
    state.check_network(net)
    return {
        u: sum(1 for v in net.out_neighbors(u) if state.is_active(v))
        for u in state.active
    }


def out_degree_detect(net: IcNetwork, state: ActivationState, budget: int) -> EffectorResult:
    """
    The ``budget`` active nodes with the most active out-neighbours.

    Ties go to the lower node id.

    Raises:
        ArgumentError: If the budget is outside 1..N1
    """
    _check_budget(state, budget)
    degrees = induced_out_degrees(net, state)
    ranked = sorted(degrees, key=lambda u: (-degrees[u], u))
    members = frozenset(ranked[:budget])
    return EffectorResult(
        members=members,
        budget=budget,
        algorithm=Algorithm.OUTDEGREE,
        score=float(sum(degrees[u] for u in members)),
        notes=OUTDEGREE_NOTE,
    )


def random_detect(
    state: ActivationState,
    budget: int,
    rng: np.random.Generator | int | None = None,
) -> EffectorResult:
    """
    ``budget`` distinct active nodes drawn uniformly.

    Args:
        state: Observed activation state
        budget: Number of effectors B (1..N1)
        rng: Generator or integer seed

    Raises:
        ArgumentError: If the budget is outside 1..N1
    """
    _check_budget(state, budget)
    generator = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    picked = generator.choice(np.asarray(state.active), size=budget, replace=False)
    return EffectorResult(
        members=frozenset(int(u) for u in picked),
        budget=budget,
        algorithm=Algorithm.RANDOM,
        score=0.0,
    )
