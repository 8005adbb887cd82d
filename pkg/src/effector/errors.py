"""Exception classes for effector."""


# ============================================================================
# Base Exceptions
# ============================================================================

class EffectorError(Exception):
    """Base exception for all effector errors."""
    pass


class ArgumentError(EffectorError, ValueError):
    """An operation was called with arguments outside its domain."""
    pass


# ============================================================================
# Graph Exceptions
# ============================================================================

class GraphError(EffectorError):
    """Base exception for network construction and lookup errors."""
    pass


class EdgeListParseError(GraphError):
    """A line of an edge-list file could not be parsed."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class UnknownNodeError(GraphError):
    """A node identifier is not part of the network."""
    pass


class NotADagError(GraphError):
    """The subgraph induced on a node set contains a directed cycle."""
    pass


# ============================================================================
# Solver Exceptions
# ============================================================================

class InfeasibleError(EffectorError):
    """An optimization subproblem has no finite solution."""
    pass


class MatchingInfeasibleError(InfeasibleError):
    """Every perfect matching of a bipartite instance has infinite weight."""
    pass


# ============================================================================
# Configuration Exceptions
# ============================================================================

class ConfigError(EffectorError):
    """Configuration or experiment file is invalid."""
    pass


# ============================================================================
# Storage Exceptions
# ============================================================================

class StorageError(EffectorError):
    """A data file could not be read or written."""
    pass
