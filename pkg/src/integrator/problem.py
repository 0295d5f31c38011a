"""Problem, event and outcome types for the embedded Runge-Kutta integrator."""

from typing import Callable, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

RhsFunction = Callable[[float, np.ndarray], np.ndarray]
EventFunction = Callable[[float, np.ndarray], float]

Status = Literal["EventHit", "MaxSteps", "StepFloor", "NonFinite", "ReachedTEnd"]


class OdeProblem(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int = Field(gt=0)
    rhs: RhsFunction
    direction: Literal["forward", "backward"] = "forward"

    @property
    def sign(self) -> float:
        """Orientation of the clock: +1 forward, -1 backward."""
        return 1.0 if self.direction == "forward" else -1.0


class EventSpec(BaseModel):
    """Zero crossing of g along the trajectory.

    The direction is measured along the integration direction, so "decreasing"
    on a backward problem fires when g falls as the clock runs backward.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g: EventFunction
    direction: Literal["any", "decreasing", "increasing"] = "any"
    terminal: bool = True
    label: str


class EventHit(BaseModel):
    label: str
    t: float
    y: List[float]


class IntegrationStats(BaseModel):
    steps_accepted: int = 0
    steps_rejected: int = 0
    rhs_evals: int = 0

    def merged(self, other: "IntegrationStats") -> "IntegrationStats":
        """Sum two stats records.

        Args:
            other (IntegrationStats): Stats to add.

        Returns:
            IntegrationStats: Combined counts.
        """
        return IntegrationStats(
            steps_accepted=self.steps_accepted + other.steps_accepted,
            steps_rejected=self.steps_rejected + other.steps_rejected,
            rhs_evals=self.rhs_evals + other.rhs_evals,
        )


class IntegrationOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: Status
    event: Optional[EventHit] = None
    t: np.ndarray
    y: np.ndarray
    stats: IntegrationStats
    event_log: List[EventHit] = Field(default_factory=list)

    @property
    def final_t(self) -> float:
        """Clock value of the last sample."""
        return float(self.t[-1])

    @property
    def final_y(self) -> np.ndarray:
        """State of the last sample."""
        return self.y[-1]

    @property
    def samples(self) -> List[tuple]:
        """Samples as (t, y) pairs."""
        return [(float(t), y.copy()) for t, y in zip(self.t, self.y)]
