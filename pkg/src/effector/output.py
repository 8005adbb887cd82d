"""Output formatting module."""

import csv
import io
import json
import math
import os
import sys
from typing import Iterable, Optional

from effector.distance import DistanceTable
from effector.graph import IcNetwork, format_edge_list
from effector.mlbed import ExtractedDag
from effector.models import EffectorResult, MetricEstimate, ResultRecord, SweepRecord


# ============================================================================
# ANSI Color Support
# ============================================================================

class Colors:
    """ANSI color codes for terminal output."""

    RESET = "\033[0m"
    BOLD = "\033[1m"
    DIM = "\033[2m"

    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"

    @classmethod
    def enabled(cls) -> bool:
        """
        Check if colors should be enabled.

        Colors are enabled when:
        - stdout is a TTY
        - NO_COLOR environment variable is not set

        Returns:
            True if colors should be enabled
        """
        return sys.stdout.isatty() and "NO_COLOR" not in os.environ


def colorize(text: str, color: str) -> str:
    """
    Apply color if colors are enabled.

    Args:
        text: The text to colorize
        color: The ANSI color code

    Returns:
        Colorized text if colors are enabled, otherwise plain text
    """
    if Colors.enabled():
        return f"{color}{text}{Colors.RESET}"
    return text


# ============================================================================
# Numbers
# ============================================================================

def format_number(value: Optional[float]) -> str:
    """
    Exact text for a float: ``repr`` for finite values, ``inf``/``-inf`` otherwise.

    None becomes the empty string.
    """
    if value is None:
        return ""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _json_number(value: float) -> float | str:
    """JSON has no infinity; infinite values are written as strings."""
    return format_number(value) if math.isinf(value) else value


# ============================================================================
# Detection Results
# ============================================================================

def result_to_dict(result: EffectorResult, net: IcNetwork) -> dict:
    """
    Convert a result to a JSON-serializable dict.

    Members are reported by their node labels.
    """
    data = {
        "algorithm": result.algorithm.value,
        "budget": result.budget,
        "effectors": [net.label(u) for u in result.sorted_members],
        "score": _json_number(result.score),
    }
    if result.zero_likelihood:
        data["zero_likelihood"] = True
    if result.notes:
        data["notes"] = result.notes
    if result.details:
        details = {}
        for key, value in result.details.items():
            if key == "anchors":
                value = [net.label(u) for u in value]
            elif isinstance(value, float):
                value = _json_number(value)
            elif isinstance(value, dict):
                value = {k: _json_number(v) if isinstance(v, float) else v for k, v in value.items()}
            details[key] = value
        data["details"] = details
    return data


def format_result_json(result: EffectorResult, net: IcNetwork, pretty: bool = True) -> str:
    data = result_to_dict(result, net)
    if pretty:
        return json.dumps(data, indent=2)
    return json.dumps(data)


def format_result(result: EffectorResult, net: IcNetwork) -> str:
    """
    Format a result for terminal display.

    Example output:
        mbed  B=2  score=1.386294
        3
        17
    """
    header = f"{result.algorithm.value}  B={result.budget}  score={result.score:.6g}"
    lines = [colorize(header, Colors.BOLD)]
    if result.zero_likelihood:
        lines.append(colorize("warning: every set of this size has likelihood 0", Colors.YELLOW))
    if result.notes:
        lines.append(colorize(f"note: {result.notes}", Colors.DIM))
    lines.extend(net.label(u) for u in result.sorted_members)
    return "\n".join(lines)


# ============================================================================
# Estimates
# ============================================================================

def estimates_to_dict(estimates: dict[str, MetricEstimate]) -> dict:
    return {
        name: {"mean": e.mean, "stderr": e.stderr, "trials": e.trials}
        for name, e in estimates.items()
    }


def format_estimates(estimates: dict[str, MetricEstimate]) -> str:
    """
    Format metric estimates, one per line.

    Example output:
        f1  2.4812 ± 0.0153  (10000 trials)
    """
    return "\n".join(
        f"{name:<3} {e.mean:.4f} ± {e.stderr:.4f}  ({e.trials} trials)"
        for name, e in estimates.items()
    )


# ============================================================================
# CSV Tables
# ============================================================================

RECORD_HEADER = ["replication", "n1", "budget", "algorithm", "f1_mean", "f1_stderr", "score", "wall_ms"]
F2_HEADER = ["f2_mean", "f2_stderr"]
SWEEP_HEADER = ["lambda", "algorithm", "f1_mean", "f1_stderr", "score"]
DISTANCE_HEADER = ["u", "v", "k", "distance"]


def _csv(header: list[str], rows: Iterable[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def records_to_csv(records: Iterable[ResultRecord], f2: bool = False) -> str:
    """
    Result records as CSV.

    Skipped records keep their identifying columns and leave the rest blank.
    """
    header = RECORD_HEADER + (F2_HEADER if f2 else [])
    rows = []
    for r in records:
        row = [
            str(r.replication), str(r.n1), str(r.budget), r.algorithm.value,
            format_number(r.f1_mean), format_number(r.f1_stderr),
            format_number(r.score), format_number(r.wall_ms),
        ]
        if f2:
            row += [format_number(r.f2_mean), format_number(r.f2_stderr)]
        rows.append(row)
    return _csv(header, rows)


def sweep_to_csv(records: Iterable[SweepRecord]) -> str:
    return _csv(SWEEP_HEADER, (
        [format_number(r.lam), r.algorithm.value, format_number(r.f1_mean),
         format_number(r.f1_stderr), format_number(r.score)]
        for r in records
    ))


def distance_table_to_csv(table: DistanceTable, net: IcNetwork) -> str:
    """Distance dump ``u,v,k,distance`` by node label; unreachable pairs read ``inf``."""
    return _csv(DISTANCE_HEADER, (
        [net.label(u), net.label(v), str(table.k), format_number(d)]
        for u, v, d in table.rows()
    ))


# ============================================================================
# Extracted DAGs
# ============================================================================

def format_dags(net: IcNetwork, dags: Iterable[ExtractedDag]) -> str:
    """
    Extracted DAGs as an edge list with probabilities.

    Each component starts with a comment line, so the text reloads with
    ``load_edge_list``.
    """
    parts = []
    for index, dag in enumerate(dags):
        parts.append(
            f"# component {index}: {len(dag.nodes)} node(s), "
            f"{len(dag.kept_edges)} edge(s), entropy {dag.entropy:.6f}\n"
        )
        parts.append(format_edge_list(net, dag.kept_edges))
    return "".join(parts)
