"""Seed states on the invariant manifolds the shots depart from."""

import math
from typing import Tuple

import numpy as np

from src.integrator import IntegrationStats, OdeProblem, integrate
from src.model.config_schema_model import ShootConfig
from src.model.domain import FarState, ModelParams, NearState
from src.model.exceptions import DomainError
from src.utils.logger import get_logger

logger = get_logger(__name__)

# lifted states stay well inside the near-field frame
_MAX_RELEASE_U = 0.5


def require_branch(params: ModelParams, branch: str) -> None:
    if params.branch != branch:
        raise DomainError(f"Operation requires the {branch} branch, got {params.branch}")


def seed_far_minus(params: ModelParams, x0: float, delta: float) -> FarState:
    """Point on the far-field center manifold of (x0, 0, 0), t < 0 branch, to O(delta).

    Args:
        params (ModelParams): Exponent, minus branch.
        x0 (float): Positive equilibrium coordinate.
        delta (float): Offset along z, zero gives the equilibrium itself.

    Returns:
        FarState: (x0 + (p - p^2 x0^2) delta, p x0 delta, delta).

    Raises:
        DomainError: For the plus branch, x0 <= 0 or delta < 0.
    """
    require_branch(params, "minus")
    if not x0 > 0.0:
        raise DomainError(f"x0 must be positive, got {x0!r}")
    if delta < 0.0:
        raise DomainError(f"delta must be non-negative, got {delta!r}")
    p = params.p
    return FarState(x=x0 + (p - p * p * x0 * x0) * delta, y=p * x0 * delta, z=delta)


def seed_near_plus(params: ModelParams, a_plus: float, eps: float) -> NearState:
    """Point on the manifold leaving (a_plus, 0, 0) on the t > 0 branch.

    For a_plus > 0 the departure is along the center manifold, for a_plus < 0 along
    the unstable manifold, where u grows like eps^(1/m).

    Args:
        params (ModelParams): Exponent, plus branch.
        a_plus (float): Nonzero equilibrium coordinate.
        eps (float): Offset in xi, zero gives the equilibrium itself.

    Returns:
        NearState: Seed state.

    Raises:
        DomainError: For the minus branch, a_plus = 0 or eps < 0.
    """
    require_branch(params, "plus")
    if a_plus == 0.0:
        raise DomainError("a_plus = 0 is the degenerate seed of the exact solution")
    if eps < 0.0:
        raise DomainError(f"eps must be non-negative, got {eps!r}")
    m, p = params.m, params.p
    if a_plus > 0.0:
        k = p * a_plus
        return NearState(xi=a_plus + eps, u=eps / k, w=k ** (-(m + 1.0)) * eps**m)
    c = p * abs(a_plus) * m
    root = eps ** (1.0 / m)
    return NearState(
        xi=a_plus + eps, u=c ** (1.0 / m) * root, w=c ** ((m + 1.0) / m) * root / m
    )


def slow_manifold_w(params: ModelParams, xi: float, u: float) -> float:
    """First corrected quasi-static w on the t > 0 center manifold.

    W0 = u^m (1 + u)/(p xi) balances the w equation; one correction step gives
    W1 = W0 - (dW0/dtau)/(p xi) with the derivative taken along the flow.

    Args:
        params (ModelParams): Exponent.
        xi (float): Positive similarity coordinate.
        u (float): Non-negative amplitude.

    Returns:
        float: W1(xi, u).
    """
    m, p = params.m, params.p
    um = u**m
    pxi = p * xi
    w0 = um * (1.0 + u) / pxi
    dw0_du = (m * u ** (m - 1.0) * (1.0 + u) + um) / pxi
    dw0_dxi = -w0 / xi
    return w0 - (dw0_du * w0 + dw0_dxi * um) / pxi


def release_amplitude(params: ModelParams, xi: float, budget: int) -> float:
    """Amplitude at which the fast decay no longer caps the explicit step.

    The fast rate is p xi and the escape clock from u scales like u^(1-m)/((m-1) k)
    with k = 1/(p xi); requiring about `budget` stability-limited steps gives
    u = ((p xi)^2 / (3 (m - 1) budget))^(1/(m-1)).

    Args:
        params (ModelParams): Exponent.
        xi (float): Positive similarity coordinate.
        budget (int): Allowed explicit steps.

    Returns:
        float: Release amplitude, capped inside the near-field frame.
    """
    m, p = params.m, params.p
    u_rel = ((p * xi) ** 2 / (3.0 * (m - 1.0) * budget)) ** (1.0 / (m - 1.0))
    return min(u_rel, _MAX_RELEASE_U)


def escape_clock(params: ModelParams, state: NearState) -> float:
    """Leading-order clock for u to blow up from a t > 0 slow-manifold state.

    With w = u^m / (p xi) and xi frozen, u^(1-m) falls at the rate (m-1) / (p xi).

    Args:
        params (ModelParams): Exponent.
        state (NearState): State near the center manifold.

    Returns:
        float: p xi u^(1-m) / (m - 1), or 0 when xi or u is not positive.
    """
    if state.xi <= 0.0 or state.u <= 0.0:
        return 0.0
    m = params.m
    return params.p * state.xi * state.u ** (1.0 - m) / (m - 1.0)


def lift_along_slow_manifold(
    params: ModelParams, seed: NearState, cfg: ShootConfig
) -> Tuple[NearState, np.ndarray, IntegrationStats]:
    """Carry a t > 0 center-manifold seed up to the release amplitude.

    With u as the independent variable the reduced flow dxi/du = u^m / W1 and
    dtau/du = 1 / W1 is not stiff. Returned clock values are shifted so that the
    released state sits at tau = 0.

    Args:
        params (ModelParams): Exponent, plus branch.
        seed (NearState): Seed with xi > 0.
        cfg (ShootConfig): Shooting settings (lift_budget, integ).

    Returns:
        Tuple[NearState, np.ndarray, IntegrationStats]: Released state, (tau, xi, u, w)
            rows from seed to release, and integration work.
    """
    require_branch(params, "plus")
    rows = np.array([[0.0, seed.xi, seed.u, seed.w]])
    if seed.xi <= 0.0 or seed.u <= 0.0:
        return seed, rows, IntegrationStats()
    u_release = release_amplitude(params, seed.xi, cfg.lift_budget)
    if u_release <= seed.u:
        return seed, rows, IntegrationStats()

    m = params.m

    def reduced(u: float, y: np.ndarray) -> np.ndarray:
        w1 = slow_manifold_w(params, y[0], u)
        return np.array([u**m / w1, 1.0 / w1])

    integ = cfg.integ.model_copy(update={"h_init": min(cfg.integ.h_init, 0.1 * seed.u)})
    problem = OdeProblem(dimension=2, rhs=reduced, direction="forward")
    outcome = integrate(problem, [seed.xi, 0.0], seed.u, u_release, integ)
    if outcome.status != "ReachedTEnd":
        logger.warning(f"Slow-manifold lift stopped with {outcome.status}; using seed as is")
        return seed, rows, outcome.stats

    u_grid = outcome.t
    xi_grid = outcome.y[:, 0]
    tau = outcome.y[:, 1] - outcome.y[-1, 1]
    w_grid = np.array([slow_manifold_w(params, xi, u) for xi, u in zip(xi_grid, u_grid)])
    rows = np.column_stack([tau, xi_grid, u_grid, w_grid])
    released = NearState(xi=float(xi_grid[-1]), u=float(u_grid[-1]), w=float(w_grid[-1]))
    if not math.isfinite(released.w) or released.w <= 0.0:
        logger.warning("Slow-manifold lift produced a non-positive w; using seed as is")
        return seed, rows[:1], outcome.stats
    logger.debug(f"Lifted seed at xi={seed.xi!r} from u={seed.u!r} to u={released.u!r}")
    return released, rows, outcome.stats
