from src.integrator.problem import (
    EventHit,
    EventSpec,
    IntegrationOutcome,
    IntegrationStats,
    OdeProblem,
)
from src.integrator.runge_kutta import hermite_interpolate, integrate, step_embedded

__all__ = [
    "EventHit",
    "EventSpec",
    "IntegrationOutcome",
    "IntegrationStats",
    "OdeProblem",
    "hermite_interpolate",
    "integrate",
    "step_embedded",
]
