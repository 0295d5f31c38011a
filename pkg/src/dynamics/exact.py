"""Closed-form solutions and the explicit far-field stable manifold."""

import math
from typing import Callable, Dict, Union

import numpy as np

from src.dynamics.vector_fields import energy, energy_rate, far_rhs, near_rhs
from src.model.domain import FarState, ModelParams, NearState
from src.model.exceptions import DomainError


def x_q(m: float) -> float:
    """Far-field value sqrt(2/(m+1)) of the stationary exact solution.

    Args:
        m (float): Diffusion exponent.

    Returns:
        float: x_Q.
    """
    return math.sqrt(2.0 / (m + 1.0))


def exact_near(params: ModelParams, a: float, tau: float) -> NearState:
    """Exact near-field trajectory with xi = w and u^(m+1) = p xi^2.

    Args:
        params (ModelParams): Exponent; both branches share the solution.
        a (float): Positive clock scale.
        tau (float): Clock value below 1/a.

    Returns:
        NearState: State at tau.

    Raises:
        DomainError: If a <= 0 or tau >= 1/a.
    """
    m = params.m
    if not a > 0.0:
        raise DomainError(f"Exact solution needs a > 0, got {a!r}")
    if not tau * a < 1.0:
        raise DomainError(f"Exact solution defined for tau < 1/a, got tau={tau!r}, a={a!r}")
    r = a / (1.0 - tau * a)
    xi = (2.0**m * (m + 1.0) / (m - 1.0) ** (m + 1.0)) ** (1.0 / (m - 1.0)) * r ** (
        (m + 1.0) / (m - 1.0)
    )
    u = (2.0 * (m + 1.0) / (m - 1.0) ** 2) ** (1.0 / (m - 1.0)) * r ** (2.0 / (m - 1.0))
    return NearState(xi=xi, u=u, w=xi)


def exact_near_rate(m: float, u: float) -> float:
    """Rate r = a / (1 - tau a) at which exact_near passes through amplitude u.

    Clock differences along the exact trajectory are differences of -1/r.

    Args:
        m (float): Diffusion exponent.
        u (float): Positive amplitude.

    Returns:
        float: r with u = (2 (m+1) / (m-1)^2)^(1/(m-1)) r^(2/(m-1)).
    """
    scale = (2.0 * (m + 1.0) / (m - 1.0) ** 2) ** (1.0 / (m - 1.0))
    return (u / scale) ** (0.5 * (m - 1.0))


def exact_far(params: ModelParams, b: float, s: float) -> FarState:
    """Exact far-field trajectory with x fixed at x_Q.

    Args:
        params (ModelParams): Exponent; both branches share the solution.
        b (float): Positive clock scale.
        s (float): Clock value above -1/b.

    Returns:
        FarState: State at s.

    Raises:
        DomainError: If b <= 0 or s <= -1/b.
    """
    if not b > 0.0:
        raise DomainError(f"Exact solution needs b > 0, got {b!r}")
    if not 1.0 + s * b > 0.0:
        raise DomainError(f"Exact solution defined for s > -1/b, got s={s!r}, b={b!r}")
    xq = x_q(params.m)
    z = b / (1.0 + s * b)
    return FarState(x=xq, y=z / xq, z=z)


def exact_stationary_profile(
    m: float, xi: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """H(xi) = (p xi^2)^(1/(m+1)) for xi >= 0, zero to the left.

    Args:
        m (float): Diffusion exponent.
        xi (Union[float, np.ndarray]): Similarity coordinate(s).

    Returns:
        Union[float, np.ndarray]: Profile values.
    """
    p = 0.5 * (m + 1.0)
    xi_arr = np.maximum(np.asarray(xi, dtype=float), 0.0)
    values = (p * xi_arr * xi_arr) ** (1.0 / (m + 1.0))
    return float(values) if np.ndim(values) == 0 else values


def stable_manifold_psi(params: ModelParams, x: float, x0: float) -> float:
    """Leading-order far-field stable manifold z = psi(x) through (x0, 0, 0).

    Args:
        params (ModelParams): Exponent and branch.
        x (float): Positive far-field coordinate.
        x0 (float): Positive equilibrium coordinate.

    Returns:
        float: z on the manifold.

    Raises:
        DomainError: If x or x0 is not positive.
    """
    if not (x > 0.0 and x0 > 0.0):
        raise DomainError(f"psi needs x, x0 > 0, got x={x!r}, x0={x0!r}")
    p = params.p
    return -params.sign * p * x * (1.0 - (x / x0) ** (1.0 / p))


def _central_derivative(func: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """Fourth-order central difference of a vector function."""
    return (-func(t + 2.0 * h) + 8.0 * func(t + h) - 8.0 * func(t - h) + func(t - 2.0 * h)) / (
        12.0 * h
    )


def exact_solution_residuals(m: float, n: int = 64) -> Dict[str, float]:
    """Residuals of the closed-form trajectories in both systems and both branches.

    Derivatives come from fourth-order central differences with a step scaled to the
    local rate; each residual is the largest relative mismatch with the vector field
    over the sampled clock range. "energy_plus" compares the difference quotient of the
    energy with its closed-form rate on the t > 0 branch.

    Args:
        m (float): Diffusion exponent.
        n (int): Clock samples per trajectory.

    Returns:
        Dict[str, float]: Residual per check.
    """
    report: Dict[str, float] = {}
    for branch in ("plus", "minus"):
        params = ModelParams(m=m, branch=branch)

        def near(tau: float, params: ModelParams = params) -> np.ndarray:
            return exact_near(params, 1.0, tau).as_array()

        def far(s: float, params: ModelParams = params) -> np.ndarray:
            return exact_far(params, 1.0, s).as_array()

        worst_near = 0.0
        for tau in np.linspace(-4.0, 0.5, n):
            rate = 1.0 / (1.0 - tau)
            diff = _central_derivative(near, float(tau), 1e-3 / rate)
            rhs = near_rhs(params, exact_near(params, 1.0, float(tau)))
            worst_near = max(worst_near, float(np.max(np.abs(diff - rhs)) / np.max(np.abs(rhs))))
        report[f"near_{branch}"] = worst_near

        worst_far = 0.0
        for s in np.linspace(-0.5, 4.0, n):
            rate = 1.0 / (1.0 + s)
            diff = _central_derivative(far, float(s), 1e-3 / rate)
            rhs = far_rhs(params, exact_far(params, 1.0, float(s)))
            worst_far = max(worst_far, float(np.max(np.abs(diff - rhs)) / np.max(np.abs(rhs))))
        report[f"far_{branch}"] = worst_far

    plus = ModelParams(m=m, branch="plus")
    worst_energy = 0.0
    for tau in np.linspace(-4.0, 0.5, n):
        rate = 1.0 / (1.0 - tau)

        def e_of(t: float) -> np.ndarray:
            return np.array([energy(plus, exact_near(plus, 1.0, t)).E])

        diff = float(_central_derivative(e_of, float(tau), 1e-3 / rate)[0])
        expected = energy_rate(plus, exact_near(plus, 1.0, float(tau)))
        worst_energy = max(worst_energy, abs(diff - expected) / abs(expected))
    report["energy_plus"] = worst_energy
    return report
