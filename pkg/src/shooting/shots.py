"""Backward (t < 0) and forward (t > 0) shots with frame switching."""

import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.dynamics.exact import exact_near_rate
from src.dynamics.vector_fields import (
    far_field,
    far_rows_to_near,
    far_to_near,
    near_field,
    near_rows_to_far,
    near_to_far,
)
from src.integrator import EventSpec, IntegrationOutcome, IntegrationStats, OdeProblem, integrate
from src.model.config_schema_model import ShootConfig
from src.model.domain import (
    FRAME_FAR,
    FRAME_LIFT,
    FRAME_NEAR,
    ModelParams,
    ShotRecord,
    Termination,
)
from src.model.exceptions import DomainError, NonEvaluableShotError, ShotAssertionError
from src.shooting.seeds import (
    escape_clock,
    lift_along_slow_manifold,
    require_branch,
    seed_far_minus,
    seed_near_plus,
)
from src.utils.logger import get_logger
from src.utils.performance import record_shot_stats

logger = get_logger(__name__)

# w below this fraction of p xi u (1 - u) ends the t < 0 near leg
LANDING_RATIO = 1e-4
# forward near legs run at least this many escape clocks
ESCAPE_MARGIN = 4.0
STATIONARY_ULPS = 4
STATIONARY_SAMPLES = 200


def _near_rows(
    params: ModelParams, clock: np.ndarray, near: np.ndarray, frame: float
) -> np.ndarray:
    far = near_rows_to_far(params, near)
    return np.column_stack([clock, np.full(len(clock), frame), near, far])


def _far_rows(params: ModelParams, clock: np.ndarray, far: np.ndarray) -> np.ndarray:
    near = far_rows_to_near(params, far)
    return np.column_stack([clock, np.full(len(clock), FRAME_FAR), near, far])


def _overflow_event(limit: float) -> EventSpec:
    return EventSpec(
        g=lambda _t, y: float(np.max(np.abs(y))) - limit, direction="increasing", label="overflow"
    )


def _failure(outcome: IntegrationOutcome, leg: str, near: Sequence[float]) -> Termination:
    """Termination for a leg that ended without a classifying event."""
    kind = "BudgetExhausted" if outcome.status in ("MaxSteps", "ReachedTEnd") else "Diverged"
    xi, u, w = near
    return Termination(kind=kind, at_time=outcome.final_t, xi=xi, u=u, w=w, leg=leg)


def _finish(
    params: ModelParams,
    seed: float,
    seed_kind: str,
    termination: Termination,
    blocks: List[np.ndarray],
    stats: IntegrationStats,
    started: float,
    x0_estimate: Optional[float] = None,
    x0_raw: Optional[float] = None,
) -> ShotRecord:
    record_shot_stats(
        stats.steps_accepted, stats.steps_rejected, stats.rhs_evals, time.perf_counter() - started
    )
    samples = np.vstack(blocks) if blocks else np.empty((0, 8))
    samples.setflags(write=False)
    return ShotRecord(
        params=params,
        seed=seed,
        seed_kind=seed_kind,
        termination=termination,
        samples=samples,
        stats=stats,
        x0_estimate=x0_estimate,
        x0_raw=x0_raw,
    )


def _landing_event(params: ModelParams) -> EventSpec:
    """w has relaxed onto the t < 0 slow manifold while u is still positive.

    Backward in tau w decays at the rate p xi towards -u^m (1 - u) / (p xi). The
    threshold vanishes for xi <= 0 and u >= 1, where the event coincides with w_zero.
    """
    p = params.p

    def g(_t: float, y: np.ndarray) -> float:
        xi, u, w = y
        return float(w - LANDING_RATIO * p * max(xi, 0.0) * u * max(1.0 - u, 0.0))

    return EventSpec(g=g, direction="decreasing", label="landed")


def _landing_amplitude(params: ModelParams, xi: float, u: float, w: float) -> float:
    """u at which w reaches zero with xi and u^m (1 - u) frozen.

    Solves w' = -c - k w, u' = -w in the backward clock with k = p xi, c = u^m (1 - u).
    """
    k = params.p * xi
    c = u**params.m * (1.0 - u)
    if k <= 0.0 or c <= 0.0 or w <= 0.0:
        return u
    return u - w / k + c / (k * k) * math.log1p(k * w / c)


def _stationary_shot(
    params: ModelParams, x0: float, cfg: ShootConfig, started: float
) -> ShotRecord:
    """Backward shot from x_Q along the closed-form trajectory into the origin.

    Far leg: x = x_Q, y = z / x_Q with reversed clock 1/delta - 1/z. Near leg:
    xi = w = x_Q u^p, down to u = eq_tol.
    """
    p, m, xq = params.p, params.m, params.x_q
    delta = cfg.delta
    z_switch = xq * (xq / cfg.switch_xi) ** (1.0 / p)
    blocks: List[np.ndarray] = []
    if z_switch > delta:
        z = np.geomspace(delta, z_switch, STATIONARY_SAMPLES)
        far = np.column_stack([np.full(len(z), xq), z / xq, z])
        blocks.append(_far_rows(params, 1.0 / delta - 1.0 / z, far))
        u_switch = xq / z_switch
    else:
        u_switch = xq / delta
    u = np.geomspace(u_switch, cfg.eq_tol, STATIONARY_SAMPLES)
    xi = xq * u**p
    rate_switch = exact_near_rate(m, u_switch)
    clock = np.array([1.0 / rate_switch - 1.0 / exact_near_rate(m, v) for v in u])
    blocks.append(_near_rows(params, clock, np.column_stack([xi, u, xi]), FRAME_NEAR))
    term = Termination(
        kind="NearEquilibrium", at_time=float(clock[-1]), xi=float(xi[-1]), u=float(u[-1]),
        w=float(xi[-1]), value=float(xi[-1]),
    )
    logger.debug(f"shoot_minus m={m!r} at x_Q follows the closed-form trajectory")
    return _finish(params, x0, "x0", term, blocks, IntegrationStats(), started)


def shoot_minus(params: ModelParams, x0: float, cfg: Optional[ShootConfig] = None) -> ShotRecord:
    """Shoot the t < 0 profile backward from the far-field equilibrium (x0, 0, 0).

    The far leg runs the reversed far-field flow from the center-manifold seed until
    xi = x y^-p drops to switch_xi, then the near leg runs backward in tau until u
    reaches u_floor, w reaches zero, or the state settles within eq_tol of the xi-axis.

    Once the fast decay of w is spent (see _landing_event) the shot stops and the
    remaining motion is projected: it ends HitW0 at the projected u, or
    NearEquilibrium when that u is within eq_tol. At x0 = x_Q (to rounding) the shot
    follows the closed-form trajectory into the origin.

    Args:
        params (ModelParams): Exponent, minus branch.
        x0 (float): Positive far-field equilibrium coordinate.
        cfg (Optional[ShootConfig]): Shooting settings.

    Returns:
        ShotRecord: Classified shot with both legs sampled.

    Raises:
        DomainError: For the plus branch or x0 <= 0.
    """
    cfg = cfg or ShootConfig()
    require_branch(params, "minus")
    if not x0 > 0.0:
        raise DomainError(f"x0 must be positive, got {x0!r}")
    started = time.perf_counter()
    if abs(x0 - params.x_q) <= STATIONARY_ULPS * np.finfo(float).eps * params.x_q:
        return _stationary_shot(params, x0, cfg, started)
    p = params.p
    blocks: List[np.ndarray] = []
    stats = IntegrationStats()

    seed = seed_far_minus(params, x0, cfg.delta)
    switch_xi = cfg.switch_xi
    if seed.x * seed.y ** (-p) > switch_xi:
        far_events = [
            EventSpec(
                g=lambda _t, y: y[0] - switch_xi * max(y[1], 0.0) ** p,
                direction="decreasing",
                label="switch",
            ),
            EventSpec(g=lambda _t, y: y[2], direction="decreasing", label="w_zero"),
            _overflow_event(cfg.overflow),
        ]
        problem = OdeProblem(dimension=3, rhs=far_field(params, reversed_clock=True))
        outcome = integrate(problem, seed.as_array(), 0.0, None, cfg.integ, far_events)
        stats = stats.merged(outcome.stats)
        blocks.append(_far_rows(params, outcome.t, outcome.y))
        label = outcome.event.label if outcome.event else None
        x_end, y_end, z_end = outcome.final_y
        if label == "w_zero":
            xi_end = x_end * y_end ** (-p) if y_end > 0.0 else math.nan
            u_end = 1.0 / y_end if y_end > 0.0 else math.nan
            term = Termination(
                kind="HitW0", at_time=outcome.final_t, xi=xi_end, u=u_end, w=0.0,
                value=u_end, leg="far",
            )
            return _finish(params, x0, "x0", term, blocks, stats, started)
        if label != "switch":
            near = [float(v) for v in blocks[-1][-1, 2:5]]
            term = _failure(outcome, "far", near)
            return _finish(params, x0, "x0", term, blocks, stats, started)
        start = far_to_near(params, outcome.final_y)
    else:
        start = far_to_near(params, seed)

    eq_tol, u_floor = cfg.eq_tol, cfg.u_floor
    near_events = [
        EventSpec(g=lambda _t, y: y[1] - u_floor, direction="decreasing", label="u_zero"),
        EventSpec(g=lambda _t, y: y[2], direction="decreasing", label="w_zero"),
        EventSpec(
            g=lambda _t, y: max(y[1], abs(y[2])) - eq_tol,
            direction="decreasing",
            label="equilibrium",
        ),
        _landing_event(params),
        _overflow_event(cfg.overflow),
    ]
    problem = OdeProblem(dimension=3, rhs=near_field(params), direction="backward")
    outcome = integrate(problem, start.as_array(), 0.0, None, cfg.integ, near_events)
    stats = stats.merged(outcome.stats)
    blocks.append(_near_rows(params, outcome.t, outcome.y, FRAME_NEAR))

    xi_end, u_end, w_end = (float(v) for v in outcome.final_y)
    label = outcome.event.label if outcome.event else None
    at = outcome.final_t
    if label == "u_zero":
        term = Termination(kind="HitU0", at_time=at, xi=xi_end, u=u_end, w=w_end, value=w_end)
    elif label == "w_zero":
        term = Termination(kind="HitW0", at_time=at, xi=xi_end, u=u_end, w=w_end, value=u_end)
    elif label == "equilibrium":
        term = Termination(
            kind="NearEquilibrium", at_time=at, xi=xi_end, u=u_end, w=w_end, value=xi_end
        )
    elif label == "landed":
        u_land = _landing_amplitude(params, xi_end, u_end, w_end)
        if u_land <= eq_tol:
            term = Termination(
                kind="NearEquilibrium", at_time=at, xi=xi_end, u=u_land, w=0.0, value=xi_end
            )
        else:
            term = Termination(
                kind="HitW0", at_time=at, xi=xi_end, u=u_land, w=0.0, value=u_land
            )
    else:
        term = _failure(outcome, "near", (xi_end, u_end, w_end))
    logger.debug(f"shoot_minus m={params.m!r} x0={x0!r}: {term.kind} at xi={term.xi!r}")
    return _finish(params, x0, "x0", term, blocks, stats, started)


def _far_readout(params: ModelParams, x: float, z: float) -> float:
    """Far-field equilibrium reached along the center manifold through (x, ., z).

    On the center manifold x drifts as dx/dz = -(p - p^2 x^2) to leading order.
    """
    p = params.p
    return x + p * (1.0 - p * x * x) * z


def shoot_plus(
    params: ModelParams, a_plus: float, cfg: Optional[ShootConfig] = None
) -> Tuple[float, ShotRecord]:
    """Shoot the t > 0 profile forward from (a_plus, 0, 0) and read off x0.

    The near leg runs for tau_inf or ESCAPE_MARGIN escape clocks of the released
    state, whichever is longer, and must reach switch_xi within it. The readout is
    taken on the far leg and the record ends with a ForwardReadout termination.

    Args:
        params (ModelParams): Exponent, plus branch.
        a_plus (float): Nonzero near-field equilibrium coordinate.
        cfg (Optional[ShootConfig]): Shooting settings.

    Returns:
        Tuple[float, ShotRecord]: x0 estimate and the shot record.

    Raises:
        DomainError: For the minus branch or a_plus = 0.
        ShotAssertionError: If w (near leg) or z (far leg) stops being positive.
        NonEvaluableShotError: If the shot diverges, exhausts its budget, or is still in
            the near field at the end of its clock.
    """
    cfg = cfg or ShootConfig()
    require_branch(params, "plus")
    started = time.perf_counter()
    p = params.p
    seed = seed_near_plus(params, a_plus, cfg.eps)
    state, lift_rows, stats = lift_along_slow_manifold(params, seed, cfg)
    blocks: List[np.ndarray] = []
    if len(lift_rows) > 1:
        blocks.append(_near_rows(params, lift_rows[:-1, 0], lift_rows[:-1, 1:], FRAME_LIFT))

    switch_xi = cfg.switch_xi
    near_events = [
        EventSpec(g=lambda _t, y: y[0] - switch_xi, direction="increasing", label="switch"),
        EventSpec(g=lambda _t, y: y[2], direction="decreasing", label="w_zero"),
        _overflow_event(cfg.overflow),
    ]
    problem = OdeProblem(dimension=3, rhs=near_field(params), direction="forward")
    if state.xi >= switch_xi:
        outcome = None
        handoff = state.as_array()
    else:
        horizon = max(cfg.tau_inf, ESCAPE_MARGIN * escape_clock(params, state))
        outcome = integrate(problem, state.as_array(), 0.0, horizon, cfg.integ, near_events)
        stats = stats.merged(outcome.stats)
        blocks.append(_near_rows(params, outcome.t, outcome.y, FRAME_NEAR))
        handoff = outcome.final_y
        label = outcome.event.label if outcome.event else None
        if label == "w_zero" or np.any(outcome.y[:, 2] <= 0.0):
            raise ShotAssertionError(
                f"w vanished on the forward shot from a_plus={a_plus!r}",
                {"a_plus": a_plus, "m": params.m, "tau": outcome.final_t},
            )
        if label != "switch":
            if outcome.status == "ReachedTEnd":
                logger.warning(
                    f"Forward shot a_plus={a_plus!r} is still in the near field at "
                    f"tau={outcome.final_t!r}"
                )
            term = _failure(outcome, "near", tuple(float(v) for v in handoff))
            record = _finish(params, a_plus, "a_plus", term, blocks, stats, started)
            raise NonEvaluableShotError(a_plus, term.kind, "a_plus", record)

    far_start = near_to_far(params, handoff).as_array()
    z_stop = cfg.z_stop
    if far_start[2] <= z_stop:
        far_t = np.array([0.0])
        far_y = far_start[None, :]
        far_status = "EventHit"
    else:
        far_events = [
            EventSpec(g=lambda _t, y: y[2] - z_stop, direction="decreasing", label="ready"),
            _overflow_event(cfg.overflow),
        ]
        far_problem = OdeProblem(dimension=3, rhs=far_field(params), direction="forward")
        far_out = integrate(far_problem, far_start, 0.0, cfg.tau_inf, cfg.integ, far_events)
        stats = stats.merged(far_out.stats)
        far_t, far_y = far_out.t, far_out.y
        ready = far_out.event is not None and far_out.event.label == "ready"
        far_status = "EventHit" if ready else far_out.status
        if not ready and far_out.status != "ReachedTEnd":
            blocks.append(_far_rows(params, far_t, far_y))
            near = [float(v) for v in blocks[-1][-1, 2:5]]
            term = _failure(far_out, "far", near)
            record = _finish(params, a_plus, "a_plus", term, blocks, stats, started)
            raise NonEvaluableShotError(a_plus, term.kind, "a_plus", record)
    blocks.append(_far_rows(params, far_t, far_y))

    if np.any(far_y[:, 2] <= 0.0):
        raise ShotAssertionError(
            f"z vanished on the forward shot from a_plus={a_plus!r}",
            {"a_plus": a_plus, "m": params.m},
        )
    x_end, y_end, z_end = (float(v) for v in far_y[-1])
    estimate = _far_readout(params, x_end, z_end)
    end_near = far_to_near(params, far_y[-1])
    term = Termination(
        kind="ForwardReadout",
        at_time=float(far_t[-1]),
        xi=end_near.xi,
        u=end_near.u,
        w=end_near.w,
        value=estimate,
        leg="far",
    )
    logger.debug(
        f"shoot_plus m={params.m!r} a_plus={a_plus!r}: x0={estimate!r} ({far_status}, "
        f"raw {x_end!r})"
    )
    record = _finish(params, a_plus, "a_plus", term, blocks, stats, started, estimate, x_end)
    return estimate, record
