from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from effector.errors import ArgumentError


class Algorithm(str, Enum):
    MBED = "mbed"
    FBED = "fbed"
    MLBED = "mlbed"
    OUTDEGREE = "outdegree"
    RANDOM = "random"


class Protocol(str, Enum):
    SEEDED = "seeded"
    RANDOM = "random"


@dataclass(frozen=True)
class EffectorResult:
    members: frozenset[int]
    budget: int
    algorithm: Algorithm
    score: float
    zero_likelihood: bool = False
    notes: str = ""
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        """Validate result data after initialization."""
        if isinstance(self.algorithm, str):
            object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if not isinstance(self.members, frozenset):
            object.__setattr__(self, "members", frozenset(self.members))
        if len(self.members) != self.budget:
            raise ArgumentError(
                f"Result has {len(self.members)} members but budget {self.budget}"
            )

    @property
    def sorted_members(self) -> list[int]:
        return sorted(self.members)


@dataclass(frozen=True)
class MetricEstimate:
    mean: float
    stderr: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise ArgumentError(f"trials must be >= 1, got {self.trials}")
        if self.mean < 0 or self.stderr < 0:
            raise ArgumentError("mean and stderr must be non-negative")


@dataclass
class ResultRecord:
    replication: int
    n1: int
    budget: int
    algorithm: Algorithm
    f1_mean: Optional[float] = None
    f1_stderr: Optional[float] = None
    score: Optional[float] = None
    wall_ms: Optional[float] = None
    f2_mean: Optional[float] = None
    f2_stderr: Optional[float] = None
    skipped: bool = False
    reason: str = ""


@dataclass
class SweepRecord:
    lam: float
    algorithm: Algorithm
    f1_mean: float
    f1_stderr: float
    score: float
