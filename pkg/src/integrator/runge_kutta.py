"""Dormand-Prince 5(4) integrator with PI step control, Hermite dense output and events."""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.integrator.problem import (
    EventHit,
    EventSpec,
    IntegrationOutcome,
    IntegrationStats,
    OdeProblem,
    Status,
)
from src.model.config_schema_model import IntegrationConfig
from src.model.exceptions import DomainError, NonFiniteStepError
from src.utils.logger import get_logger

logger = get_logger(__name__)

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A: Tuple[np.ndarray, ...] = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
# fifth-order weights minus embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
_ALPHA = 0.17
_BETA = 0.04
_HERMITE_SHRINK = 1e-3


def _dp_step(
    problem: OdeProblem, t: float, y: np.ndarray, f0: np.ndarray, h: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Advance one Dormand-Prince step with first-same-as-last reuse.

    Args:
        problem (OdeProblem): Problem supplying the rhs.
        t (float): Step start.
        y (np.ndarray): State at t.
        f0 (np.ndarray): rhs at (t, y).
        h (float): Signed step.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: (y_new, f_new, err_estimate).

    Raises:
        NonFiniteStepError: If any stage is non-finite.
    """
    k = np.empty((7, y.shape[0]))
    k[0] = f0
    y_stage = y
    for i in range(1, 7):
        y_stage = y + h * (_A[i] @ k[:i])
        k[i] = problem.rhs(t + _C[i] * h, y_stage)
    if not (np.isfinite(k).all() and np.isfinite(y_stage).all()):
        raise NonFiniteStepError(t, h)
    return y_stage, k[6], h * (_E @ k)


def step_embedded(
    problem: OdeProblem, t: float, y: Sequence[float], h: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Take a single embedded step.

    Args:
        problem (OdeProblem): Problem to advance.
        t (float): Step start.
        y (Sequence[float]): Finite state at t.
        h (float): Nonzero signed step.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Fifth-order advance and componentwise error estimate.

    Raises:
        DomainError: If h is zero, y is not finite or has the wrong length.
        NonFiniteStepError: If any stage evaluates to a non-finite value.
    """
    y_arr = np.asarray(y, dtype=float)
    if h == 0.0:
        raise DomainError("Step size must be nonzero")
    if y_arr.shape != (problem.dimension,) or not np.isfinite(y_arr).all():
        raise DomainError(f"State must be a finite {problem.dimension}-vector", {"y": list(y_arr)})
    f0 = np.asarray(problem.rhs(t, y_arr), dtype=float)
    if f0.shape != (problem.dimension,):
        raise DomainError(f"rhs returned shape {f0.shape}, expected ({problem.dimension},)")
    if not np.isfinite(f0).all():
        raise NonFiniteStepError(t, h)
    y_high, _, err = _dp_step(problem, t, y_arr, f0, h)
    return y_high, err


def hermite_interpolate(
    t0: float,
    y0: np.ndarray,
    f0: np.ndarray,
    t1: float,
    y1: np.ndarray,
    f1: np.ndarray,
    t: float,
) -> np.ndarray:
    """Cubic Hermite interpolant on step endpoints.

    Args:
        t0 (float): Step start.
        y0 (np.ndarray): State at t0.
        f0 (np.ndarray): Derivative at t0.
        t1 (float): Step end.
        y1 (np.ndarray): State at t1.
        f1 (np.ndarray): Derivative at t1.
        t (float): Evaluation point.

    Returns:
        np.ndarray: Interpolated state.
    """
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _crossed(g_prev: float, g_new: float, direction: str) -> bool:
    if direction in ("decreasing", "any") and g_prev > 0.0 >= g_new:
        return True
    if direction in ("increasing", "any") and g_prev < 0.0 <= g_new:
        return True
    return False


def _locate_event(
    problem: OdeProblem,
    event: EventSpec,
    step: Tuple[float, np.ndarray, np.ndarray, float, np.ndarray, np.ndarray],
    g_start: float,
    event_tol: float,
) -> Tuple[float, np.ndarray]:
    """Refine a sign change of g inside one accepted step.

    The bracket is first narrowed by bisection on the Hermite interpolant, then the
    bisection continues on states recomputed by sub-steps from the step start.

    Returns:
        Tuple[float, np.ndarray]: First clock value past the crossing and its state.
    """
    t0, y0, f0, t1, y1, f1 = step

    def before(g: float) -> bool:
        return g > 0.0 if g_start > 0.0 else g < 0.0

    def substep(t: float) -> np.ndarray:
        if t == t0:
            return y0
        if t == t1:
            return y1
        try:
            return _dp_step(problem, t0, y0, f0, t - t0)[0]
        except NonFiniteStepError:
            return hermite_interpolate(t0, y0, f0, t1, y1, f1, t)

    a, b = t0, t1
    coarse = max(abs(t1 - t0) * _HERMITE_SHRINK, event_tol)
    while abs(b - a) > coarse:
        mid = 0.5 * (a + b)
        if before(event.g(mid, hermite_interpolate(t0, y0, f0, t1, y1, f1, mid))):
            a = mid
        else:
            b = mid

    if not before(event.g(a, substep(a))):
        a = t0
    if before(event.g(b, substep(b))):
        b = t1

    while True:
        floor = 4.0 * np.finfo(float).eps * max(abs(a), abs(b))
        if abs(b - a) <= max(event_tol, floor):
            break
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if before(event.g(mid, substep(mid))):
            a = mid
        else:
            b = mid
    return b, substep(b)


def integrate(
    problem: OdeProblem,
    y0: Sequence[float],
    t0: float,
    t_end: Optional[float] = None,
    config: Optional[IntegrationConfig] = None,
    events: Optional[List[EventSpec]] = None,
) -> IntegrationOutcome:
    """Integrate with adaptive steps until t_end, a terminal event, or a failure.

    Args:
        problem (OdeProblem): Problem to integrate.
        y0 (Sequence[float]): Finite initial state.
        t0 (float): Initial clock value.
        t_end (Optional[float]): Final clock value; None or infinite runs unbounded
            in the problem's direction.
        config (Optional[IntegrationConfig]): Step control settings.
        events (Optional[List[EventSpec]]): Events monitored on accepted steps.

    Returns:
        IntegrationOutcome: Status, samples and step statistics.

    Raises:
        DomainError: If y0 is not finite or t_end lies against the direction.
    """
    config = config or IntegrationConfig()
    events = events or []
    sign = problem.sign
    if t_end is None:
        t_end = sign * math.inf
    if (t_end - t0) * sign < 0.0:
        raise DomainError(f"t_end={t_end!r} lies behind t0={t0!r} for a {problem.direction} run")

    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (problem.dimension,) or not np.isfinite(y).all():
        raise DomainError(f"Initial state must be a finite {problem.dimension}-vector")

    t = float(t0)
    ts: List[float] = [t]
    ys: List[np.ndarray] = [y.copy()]
    accepted = rejected = 0
    f = np.asarray(problem.rhs(t, y), dtype=float)
    rhs_evals = 1
    g_prev = [float(ev.g(t, y)) for ev in events]
    event_log: List[EventHit] = []
    hit: Optional[EventHit] = None
    status: Status

    span = abs(t_end - t0)
    h = min(config.h_init, config.h_max, span) if span > 0.0 else 0.0
    err_prev = 1e-4
    last_rejected = False

    if span == 0.0:
        status = "ReachedTEnd"
    elif not np.isfinite(f).all():
        status = "NonFinite"
    else:
        while True:
            if accepted >= config.max_steps:
                status = "MaxSteps"
                break
            remaining = abs(t_end - t)
            final_step = h >= remaining
            if final_step:
                h = remaining
            try:
                y_new, f_new, err = _dp_step(problem, t, y, f, sign * h)
            except NonFiniteStepError:
                rhs_evals += 6
                rejected += 1
                last_rejected = True
                h *= MIN_FACTOR
                if h < config.h_min:
                    status = "NonFinite"
                    break
                continue
            rhs_evals += 6

            scale = config.atol + config.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))

            if err_norm > 1.0:
                rejected += 1
                last_rejected = True
                h *= max(MIN_FACTOR, SAFETY * err_norm ** (-_ALPHA))
                if h < config.h_min:
                    status = "StepFloor"
                    break
                continue

            t_new = t_end if final_step else t + sign * h
            if t_new == t:
                status = "StepFloor"
                break
            step = (t, y, f, t_new, y_new, f_new)

            first_time = math.inf
            for i, ev in enumerate(events):
                g_new = float(ev.g(t_new, y_new))
                if _crossed(g_prev[i], g_new, ev.direction):
                    t_star, y_star = _locate_event(problem, ev, step, g_prev[i], config.event_tol)
                    record = EventHit(label=ev.label, t=float(t_star), y=y_star.tolist())
                    if ev.terminal:
                        if sign * t_star < first_time:
                            first_time = sign * t_star
                            hit = record
                    else:
                        event_log.append(record)
                g_prev[i] = g_new

            stop_time = t_new if hit is None else hit.t
            for k in range(1, config.refine):
                t_k = t + (t_new - t) * k / config.refine
                if sign * (stop_time - t_k) > 0.0:
                    ts.append(t_k)
                    ys.append(hermite_interpolate(t, y, f, t_new, y_new, f_new, t_k))

            accepted += 1
            if hit is not None:
                event_log = [e for e in event_log if sign * e.t <= sign * hit.t]
                ts.append(hit.t)
                ys.append(np.asarray(hit.y))
                status = "EventHit"
                break

            ts.append(t_new)
            ys.append(y_new.copy())
            t, y, f = t_new, y_new, f_new
            if final_step:
                status = "ReachedTEnd"
                break

            if err_norm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = SAFETY * err_norm ** (-_ALPHA) * err_prev**_BETA
                factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
            if last_rejected:
                factor = min(factor, 1.0)
            err_prev = max(err_norm, 1e-4)
            last_rejected = False
            h = min(h * factor, config.h_max)
            if h < config.h_min:
                status = "StepFloor"
                break

    stats = IntegrationStats(steps_accepted=accepted, steps_rejected=rejected, rhs_evals=rhs_evals)
    logger.debug(
        f"integrate {problem.direction} from t={t0!r}: {status} after {accepted} steps "
        f"({rejected} rejected, {rhs_evals} rhs evals)"
    )
    return IntegrationOutcome(
        status=status,
        event=hit,
        t=np.asarray(ts),
        y=np.vstack(ys),
        stats=stats,
        event_log=event_log,
    )
