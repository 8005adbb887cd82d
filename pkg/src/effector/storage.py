"""Storage module for reading data files and writing results."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Optional

from filelock import FileLock, Timeout

from effector.errors import StorageError
from effector.graph import (
    ActivationState,
    IcNetwork,
    ProbabilityModel,
    assign_probabilities,
    load_edge_list,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Reading
# ============================================================================

def _open_text(path: Path):
    try:
        # newline=None folds CRLF into LF
        return open(path, encoding="utf-8", newline=None)
    except OSError as e:
        raise StorageError(f"Cannot read {path}: {e.strerror or e}") from None


def read_network(
    path: Path,
    undirected: bool = False,
    model: Optional[ProbabilityModel] = None,
) -> IcNetwork:
    """
    Load an edge-list file and apply a probability model.

    Args:
        path: Edge-list file
        undirected: Expand every pair into both directed edges
        model: Probability model (default: keep the loaded probabilities)

    Returns:
        The network

    Raises:
        StorageError: If the file cannot be read
        EdgeListParseError: On malformed lines
    """
    with _open_text(path) as f:
        net = load_edge_list(f, undirected=undirected)
    logger.debug("Loaded %s: %d nodes, %d edges", path, net.node_count, net.edge_count)
    if model is not None:
        net = assign_probabilities(net, model)
    return net


def parse_node_list(lines: Iterable[str], net: IcNetwork) -> list[int]:
    """
    Resolve one node identifier per line to node indices.

    Blank lines and ``#`` comments are skipped; repeats are kept once.

    Raises:
        UnknownNodeError: If an identifier is not in the network
    """
    nodes: dict[int, None] = {}
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        nodes[net.index_of(line.split()[0])] = None
    return list(nodes)


def read_node_list(path: Path, net: IcNetwork) -> list[int]:
    """Read a node-list file (effectors, sources or targets)."""
    with _open_text(path) as f:
        return parse_node_list(f, net)


def read_state(path: Path, net: IcNetwork) -> ActivationState:
    """Read an activation-state file: the listed nodes are active, all others inactive."""
    return ActivationState.from_active(net.node_count, read_node_list(path, net))


def format_node_list(net: IcNetwork, nodes: Iterable[int]) -> str:
    """One node label per line, in node-index order."""
    labels = [net.label(u) for u in sorted(nodes)]
    return "\n".join(labels) + ("\n" if labels else "")


# ============================================================================
# Writing
# ============================================================================

@contextmanager
def file_lock(path: Path, timeout: float = 5.0):
    """
    Advisory file lock for safe concurrent writes.

    Uses filelock library for cross-platform compatibility.
    Automatically cleans up lock file after use.

    Args:
        path: Path to the file to lock
        timeout: Maximum time to wait for lock acquisition in seconds

    Raises:
        StorageError: If lock cannot be acquired within timeout
    """
    path.parent.mkdir(parents=True, exist_ok=True)

    lock_path = path.with_name(path.name + ".lock")
    lock = FileLock(lock_path, timeout=timeout)

    try:
        with lock:
            yield
    except Timeout:
        raise StorageError(f"Could not acquire lock on {path}")
    finally:
        if lock_path.exists():
            lock_path.unlink()


def write_text(path: Path, content: str) -> None:
    """
    Write a result file under a lock.

    Raises:
        StorageError: If the lock times out or the file cannot be written
    """
    with file_lock(path):
        try:
            path.write_text(content, encoding="utf-8", newline="\n")
        except OSError as e:
            raise StorageError(f"Cannot write {path}: {e.strerror or e}") from None
