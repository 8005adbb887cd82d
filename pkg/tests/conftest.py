"""Shared pytest fixtures for effector tests."""

import logging

import pytest
from click.testing import CliRunner

from effector.graph import ActivationState, IcNetwork


# ============================================================================
# Basic Fixtures
# ============================================================================

@pytest.fixture
def runner():
    """Click CLI test runner."""
    return CliRunner()


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep the user's global config and EFFECTOR_* variables out of every test."""
    monkeypatch.setattr("effector.config.GLOBAL_CONFIG_PATH", tmp_path / "no-global" / "config.yaml")
    for name in ("SEED", "TRIALS", "LAMBDA", "K", "PROBABILITY"):
        monkeypatch.delenv(f"EFFECTOR_{name}", raising=False)


@pytest.fixture(autouse=True)
def restore_root_logger():
    """The CLI reconfigures the root logger; undo it after each test."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


# ============================================================================
# Network Factories
# ============================================================================

@pytest.fixture
def make_network():
    """
    Factory for small networks.

    Usage: make_network(3, {(0, 1): 0.5, (1, 2): 0.5})
    """
    def factory(node_count: int, edges: dict[tuple[int, int], float]) -> IcNetwork:
        return IcNetwork(node_count, edges, explicit_probabilities=True)
    return factory


@pytest.fixture
def make_state():
    """Factory for activation states: make_state(node_count, active_nodes)."""
    def factory(node_count: int, active) -> ActivationState:
        return ActivationState.from_active(node_count, active)
    return factory


@pytest.fixture
def chain_network(make_network):
    """0 -> 1 -> 2, both edges with probability 0.5."""
    return make_network(3, {(0, 1): 0.5, (1, 2): 0.5})


@pytest.fixture
def diamond_network(make_network):
    """0 -> 1 -> 3 and 0 -> 2 -> 3, every edge with probability 0.5."""
    return make_network(4, {(0, 1): 0.5, (0, 2): 0.5, (1, 3): 0.5, (2, 3): 0.5})


@pytest.fixture
def star_network(make_network):
    """
    Centre 0 reaches leaves 1..3 with probability 1; leaves form a 0.5 cycle.

    Nothing enters 0, and leaf 3 reaches the inactive node 4 with 0.2.
    """
    edges = {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0}
    edges.update({(1, 2): 0.5, (2, 3): 0.5, (3, 1): 0.5, (3, 4): 0.2})
    return make_network(5, edges)


# ============================================================================
# File Fixtures
# ============================================================================

@pytest.fixture
def write_lines(tmp_path):
    """
    Write lines to a file under tmp_path and return its path.

    Usage: write_lines("graph.txt", ["0 1", "1 2"])
    """
    def writer(name: str, lines: list[str]):
        path = tmp_path / name
        path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
        return path
    return writer


@pytest.fixture
def study_files(write_lines):
    """
    A small undirected study: graph, state and effector files.

    Graph: path a - b - c - d plus a - c, with explicit probabilities.
    Active: a, b, c. Effectors: a.
    """
    graph = write_lines("graph.txt", [
        "# study graph",
        "a b 0.6",
        "b c 0.5",
        "c d 0.1",
        "a c 0.3",
    ])
    state = write_lines("state.txt", ["a", "b", "c"])
    effectors = write_lines("effectors.txt", ["a"])
    return {"graph": graph, "state": state, "effectors": effectors}
