"""Utility functions."""

import math
import re
from pathlib import Path
from typing import Optional

import numpy as np

from effector.errors import ArgumentError
from effector.graph import ProbabilityModel


# ============================================================================
# Probability Model Strings
# ============================================================================

_UNIFORM_PATTERN = re.compile(r'^uniform:(.+)$', re.IGNORECASE)


def parse_probability_model(text: str) -> ProbabilityModel:
    """
    Parse a probability model string.

    Accepted forms: ``uniform:P``, ``wc`` and ``explicit``.

    Args:
        text: The model string

    Returns:
        The parsed ProbabilityModel

    Raises:
        ArgumentError: If the string is not a known model or P is invalid
    """
    value = text.strip()
    lowered = value.lower()
    if lowered == "wc":
        return ProbabilityModel.weighted_cascade()
    if lowered == "explicit":
        return ProbabilityModel.explicit()

    match = _UNIFORM_PATTERN.match(value)
    if not match:
        raise ArgumentError(
            f"Invalid probability model: '{text}'. Expected uniform:P, wc or explicit"
        )
    try:
        p = float(match.group(1))
    except ValueError:
        raise ArgumentError(f"Invalid uniform probability: '{match.group(1)}'") from None
    return ProbabilityModel.uniform(p)


# ============================================================================
# Seeds
# ============================================================================

def derive_seed(master_seed: int, *path: int) -> int:
    """
    Derive a 64-bit sub-seed from a master seed and an index path.

    The same (master_seed, path) always yields the same value, and distinct
    paths give independent streams.

    Examples:
        >>> derive_seed(7, 0) == derive_seed(7, 0)
        True
    """
    sequence = np.random.SeedSequence([master_seed, *path])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(master_seed: int, *path: int) -> np.random.Generator:
    """numpy Generator seeded from ``derive_seed(master_seed, *path)``."""
    return np.random.default_rng(derive_seed(master_seed, *path))


# ============================================================================
# Lambda Grids
# ============================================================================

DEFAULT_LAMBDA_GRID = "0.05:0.95:0.05"


def parse_lambda_grid(text: str) -> list[float]:
    """
    Parse a lambda grid.

    Either ``start:stop:step`` (stop inclusive) or a comma-separated list.
    Values are rounded to 10 decimals so 0.05 steps print cleanly.

    Raises:
        ArgumentError: On malformed grids or values outside [0, 1]
    """
    value = text.strip()
    try:
        if ":" in value:
            start, stop, step = (float(part) for part in value.split(":"))
            if step <= 0:
                raise ArgumentError(f"Grid step must be positive, got {step}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            grid = [round(start + i * step, 10) for i in range(max(count, 0))]
        else:
            grid = [round(float(part), 10) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ArgumentError(f"Invalid lambda grid: '{text}'") from None

    if not grid:
        raise ArgumentError(f"Lambda grid '{text}' is empty")
    for lam in grid:
        if not 0.0 <= lam <= 1.0:
            raise ArgumentError(f"Lambda {lam} outside [0, 1]")
    return grid


# ============================================================================
# Budgets
# ============================================================================

def budget_range(n1: int) -> tuple[int, int]:
    """
    Budget bounds ceil(0.1 * n1)..floor(0.2 * n1), clamped into 1..n1.

    Examples:
        >>> budget_range(50)
        (5, 10)
        >>> budget_range(3)
        (1, 1)
    """
    if n1 < 1:
        raise ArgumentError("Budget range needs at least one active node")
    low = max(1, math.ceil(0.1 * n1 - 1e-9))
    high = max(low, math.floor(0.2 * n1 + 1e-9))
    return min(low, n1), min(high, n1)


# ============================================================================
# File Path Utilities
# ============================================================================

PROJECT_CONFIG_NAME = ".effector.yaml"


def find_project_config(start: Optional[Path] = None) -> Optional[Path]:
    """
    Find .effector.yaml by searching up from the start directory.

    Args:
        start: The directory to start searching from (default: current working directory)

    Returns:
        Path to the nearest project config file, or None if there is none
    """
    current = (start or Path.cwd()).resolve()
    while True:
        candidate = current / PROJECT_CONFIG_NAME
        if candidate.is_file():
            return candidate
        if current == current.parent:
            return None
        current = current.parent
