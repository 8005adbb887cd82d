"""Configuration module for effector settings and experiment files."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from effector.errors import ArgumentError, ConfigError
from effector.models import Algorithm, Protocol
from effector.utils import find_project_config, parse_probability_model


# ============================================================================
# Global Constants
# ============================================================================

GLOBAL_CONFIG_PATH = Path.home() / ".effector" / "config.yaml"

ENV_PREFIX = "EFFECTOR_"

DEFAULT_CONFIG_TEMPLATE = """\
# effector configuration
# Values here are defaults; command-line options override them.

# Trade-off between the two distance terms (0..1)
lambda: 0.5

# Number of edge-disjoint paths per influence distance (FBED)
k: 3

# Monte Carlo trials per estimate
trials: 10000

# Master seed for every random stream
seed: 0

# Edge probabilities: uniform:P, wc (1/in-degree) or explicit (from the edge list)
probability: wc

# Expand every edge-list pair into both directions
# undirected: false

# Output format for detect/eval: text or json
# format: text
"""

DEFAULT_EXPERIMENT_TEMPLATE = """\
# effector experiment
graph: graph.txt
undirected: true
probability: wc

# seeded: pick `size` random seeds and simulate; the budget is `size`
# random: activate `size` random nodes; the budget is drawn from 10%..20% of them
protocol: seeded
size: 10

algorithms: [mbed, fbed, mlbed, outdegree, random]
lambda: 0.5
k: 3
trials: 10000
seed: 0
replications: 50

# Evaluate every detector of a replication on the same coin streams
common_random_numbers: true
# Append f2_mean,f2_stderr columns
f2: false
# Write measured wall_ms (false writes 0 for byte-stable output)
timing: true
workers: 1
"""


# ============================================================================
# Configuration Dataclass
# ============================================================================

@dataclass
class EffectorConfig:
    """Effector defaults with layered loading."""

    lam: float = 0.5
    k: int = 3
    trials: int = 10000
    seed: int = 0
    probability: str = "wc"
    undirected: bool = False
    output_format: str = "text"  # text, json

    # Paths (computed, not from config file)
    config_path: Optional[Path] = None


# ============================================================================
# Configuration Loading
# ============================================================================

_FILE_KEYS = {
    "lambda": "lam",
    "k": "k",
    "trials": "trials",
    "seed": "seed",
    "probability": "probability",
    "undirected": "undirected",
    "format": "output_format",
}


def load_config(start: Optional[Path] = None) -> EffectorConfig:
    """
    Load configuration with precedence:
    1. Environment variables (highest)
    2. Project config (.effector.yaml, searched upwards)
    3. Global config (~/.effector/config.yaml)
    4. Built-in defaults (lowest)

    Command-line options are applied on top by the commands.

    Args:
        start: Directory to search for the project config from (default: cwd)

    Returns:
        EffectorConfig instance with merged configuration

    Raises:
        ConfigError: If a config file or environment value is malformed
    """
    config = EffectorConfig()

    if GLOBAL_CONFIG_PATH.exists():
        _merge_yaml_config(config, GLOBAL_CONFIG_PATH)

    project_config = find_project_config(start)
    if project_config:
        config.config_path = project_config
        _merge_yaml_config(config, project_config)

    _apply_env_vars(config)
    return config


def _read_yaml(path: Path) -> dict:
    try:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping")
    return data


def _merge_yaml_config(config: EffectorConfig, path: Path) -> None:
    """
    Merge YAML config file into config object.

    Raises:
        ConfigError: On unknown keys or malformed YAML
    """
    data = _read_yaml(path)
    unknown = sorted(set(data) - set(_FILE_KEYS))
    if unknown:
        raise ConfigError(f"Unknown key(s) in {path}: {', '.join(unknown)}")
    for key, attr in _FILE_KEYS.items():
        if key in data:
            setattr(config, attr, data[key])


def _apply_env_vars(config: EffectorConfig) -> None:
    """
    Apply EFFECTOR_* environment overrides.

    Raises:
        ConfigError: If a numeric variable does not parse
    """
    conversions = {
        "SEED": ("seed", int),
        "TRIALS": ("trials", int),
        "LAMBDA": ("lam", float),
        "K": ("k", int),
        "PROBABILITY": ("probability", str),
    }
    for suffix, (attr, convert) in conversions.items():
        name = ENV_PREFIX + suffix
        if name not in os.environ:
            continue
        try:
            setattr(config, attr, convert(os.environ[name]))
        except ValueError:
            raise ConfigError(f"Invalid value for {name}: '{os.environ[name]}'") from None


# ============================================================================
# Config File Management
# ============================================================================

def write_default_config(path: Path) -> None:
    """
    Write default config template to path.

    Args:
        path: Path where config file should be written
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(DEFAULT_CONFIG_TEMPLATE)


def write_experiment_template(path: Path) -> None:
    """Write a commented experiment file to path."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(DEFAULT_EXPERIMENT_TEMPLATE)


# ============================================================================
# Config Validation
# ============================================================================

def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _common_errors(lam: Any, k: Any, trials: Any, seed: Any, probability: Any) -> list[str]:
    errors = []
    if not _is_number(lam) or not 0.0 <= lam <= 1.0:
        errors.append(f"Invalid lambda: {lam} (must be in [0, 1])")
    if not _is_int(k) or k < 1:
        errors.append(f"Invalid k: {k} (must be an integer >= 1)")
    if not _is_int(trials) or trials < 1:
        errors.append(f"Invalid trials: {trials} (must be an integer >= 1)")
    if not _is_int(seed) or seed < 0:
        errors.append(f"Invalid seed: {seed} (must be a non-negative integer)")
    try:
        parse_probability_model(str(probability))
    except ArgumentError as e:
        errors.append(str(e))
    return errors


def validate_config(config: EffectorConfig) -> list[str]:
    """
    Validate configuration, return list of errors.
    Empty list = valid.

    Args:
        config: EffectorConfig instance to validate

    Returns:
        List of error messages. Empty list if configuration is valid.
    """
    errors = _common_errors(config.lam, config.k, config.trials, config.seed, config.probability)
    if not isinstance(config.undirected, bool):
        errors.append(f"Invalid undirected: {config.undirected} (must be true or false)")
    if config.output_format not in {"text", "json"}:
        errors.append(f"Invalid format: {config.output_format}")
    return errors


# ============================================================================
# Experiment Files
# ============================================================================

@dataclass
class ExperimentConfig:
    """One experiment: a graph, a state protocol and the detectors to compare."""

    graph: Path
    protocol: Protocol
    size: int
    algorithms: list[Algorithm] = field(default_factory=lambda: list(Algorithm))
    probability: str = "wc"
    undirected: bool = False
    lam: float = 0.5
    k: int = 3
    trials: int = 10000
    seed: int = 0
    replications: int = 1
    common_random_numbers: bool = True
    f2: bool = False
    timing: bool = True
    workers: int = 1


_EXPERIMENT_KEYS = {
    "graph", "undirected", "probability", "protocol", "size", "algorithms",
    "lambda", "k", "trials", "seed", "replications", "common_random_numbers",
    "f2", "timing", "workers",
}


def load_experiment_config(path: Path, base: Optional[EffectorConfig] = None) -> ExperimentConfig:
    """
    Read an experiment YAML file.

    Keys missing from the file fall back to ``base`` (lambda, k, trials,
    seed, probability, undirected). A relative graph path is resolved
    against the file's directory.

    Args:
        path: Experiment file
        base: Defaults for shared keys (default: built-in defaults)

    Returns:
        The validated ExperimentConfig

    Raises:
        ConfigError: Listing every problem found
    """
    base = base or EffectorConfig()
    if not path.is_file():
        raise ConfigError(f"Experiment file not found: {path}")
    data = _read_yaml(path)

    errors = [f"Unknown key: {key}" for key in sorted(set(data) - _EXPERIMENT_KEYS)]
    for key in ("graph", "protocol", "size"):
        if key not in data:
            errors.append(f"Missing required key: {key}")

    protocol = None
    if "protocol" in data:
        try:
            protocol = Protocol(str(data["protocol"]).lower())
        except ValueError:
            errors.append(f"Invalid protocol: {data['protocol']} (must be seeded or random)")

    algorithms = list(Algorithm)
    if "algorithms" in data:
        raw = data["algorithms"]
        if isinstance(raw, str):
            raw = [part.strip() for part in raw.split(",") if part.strip()]
        if not isinstance(raw, list) or not raw:
            errors.append("algorithms must be a non-empty list")
        else:
            algorithms = []
            for name in raw:
                try:
                    algorithms.append(Algorithm(str(name).lower()))
                except ValueError:
                    errors.append(f"Unknown algorithm: {name}")

    values = {
        "lam": data.get("lambda", base.lam),
        "k": data.get("k", base.k),
        "trials": data.get("trials", base.trials),
        "seed": data.get("seed", base.seed),
        "probability": str(data.get("probability", base.probability)),
    }
    errors.extend(_common_errors(**values))

    size = data.get("size")
    if "size" in data and (not _is_int(size) or size < 1):
        errors.append(f"Invalid size: {size} (must be an integer >= 1)")
    replications = data.get("replications", 1)
    if not _is_int(replications) or replications < 1:
        errors.append(f"Invalid replications: {replications} (must be an integer >= 1)")
    workers = data.get("workers", 1)
    if not _is_int(workers) or workers < 1:
        errors.append(f"Invalid workers: {workers} (must be an integer >= 1)")
    flags = {}
    for key, default in (
        ("undirected", base.undirected),
        ("common_random_numbers", True),
        ("f2", False),
        ("timing", True),
    ):
        flags[key] = data.get(key, default)
        if not isinstance(flags[key], bool):
            errors.append(f"Invalid {key}: {flags[key]} (must be true or false)")

    if errors:
        raise ConfigError(f"Invalid experiment file {path}:\n  " + "\n  ".join(errors))

    graph = Path(str(data["graph"]))
    if not graph.is_absolute():
        graph = path.parent / graph

    return ExperimentConfig(
        graph=graph,
        protocol=protocol,
        size=size,
        algorithms=algorithms,
        replications=replications,
        workers=workers,
        **values,
        **flags,
    )
