from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_FAILURE = "NumericalFailure"


class MipStatus(str, Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    NO_SOLUTION = "NoSolution"  # a limit was hit before any incumbent was found


@dataclass
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    basis: object = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class MipResult:
    status: MipStatus
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int
    time_s: float
    lp_iterations: int = 0
    #: (nodes processed, best bound, incumbent) after every node
    history: list[tuple[int, float, float]] = field(default_factory=list)
    #: caller-supplied description of the incumbent when ``x`` is None
    payload: object = None

    @property
    def gap(self) -> float:
        if not np.isfinite(self.objective):
            return float("inf")
        return max(0.0, self.bound - self.objective) / max(1.0, abs(self.objective))
