"""Near-field and far-field vector fields, frame transforms and the energy function.

The near-field system in (xi, u, w) is

    xi' = u^m,   u' = w,   w' = u^m (1 + s u) - s p xi w,

and the far-field system in (x, y, z) is

    x' = y - p x z,   y' = -z y,   z' = y (s + y) - s p x z - q z^2,

with s = +1 for t > 0, s = -1 for t < 0, p = (m+1)/2 and q = (m+3)/2. The frames are
related by x = xi u^-p, y = 1/u, z = w u^-q.
"""

from typing import Callable, Sequence, Tuple, Union

import numpy as np

from src.model.domain import EnergyValue, FarState, ModelParams, NearState
from src.model.exceptions import DomainError

StateLike = Union[NearState, FarState, Sequence[float], np.ndarray]
ArrayField = Callable[[float, np.ndarray], np.ndarray]


def _components(state: StateLike) -> Tuple[float, float, float]:
    if isinstance(state, (NearState, FarState)):
        a, b, c = state.as_array()
    else:
        a, b, c = (float(v) for v in state)
    return float(a), float(b), float(c)


def _u_power(u: float, m: float) -> float:
    if u < 0.0 and not float(m).is_integer():
        raise DomainError(f"u^m undefined for u={u!r} < 0 with non-integer m={m!r}")
    return u**m


def near_rhs(params: ModelParams, state: StateLike) -> np.ndarray:
    """Rate of change of (xi, u, w) per unit tau.

    Args:
        params (ModelParams): Exponent and branch.
        state (StateLike): Near-field state.

    Returns:
        np.ndarray: (xi', u', w').

    Raises:
        DomainError: If u < 0 and m is not an integer.
    """
    xi, u, w = _components(state)
    um = _u_power(u, params.m)
    s = params.sign
    return np.array([um, w, um * (1.0 + s * u) - s * params.p * xi * w])


def far_rhs(params: ModelParams, state: StateLike) -> np.ndarray:
    """Rate of change of (x, y, z) per unit s.

    Args:
        params (ModelParams): Exponent and branch.
        state (StateLike): Far-field state.

    Returns:
        np.ndarray: (x', y', z').
    """
    x, y, z = _components(state)
    s = params.sign
    pxz = params.p * x * z
    return np.array([y - pxz, -z * y, y * (s + y) - s * pxz - params.q * z * z])


def far_rhs_reversed(params: ModelParams, state: StateLike) -> np.ndarray:
    """The t < 0 far-field system in the reversed clock.

    The branch of params is ignored: the reversed clock only serves backward shots.

    Args:
        params (ModelParams): Exponent (branch ignored).
        state (StateLike): Far-field state.

    Returns:
        np.ndarray: Negated t < 0 rates.
    """
    return -far_rhs(params.with_branch("minus"), state)


def near_field(params: ModelParams) -> ArrayField:
    """Near-field rhs for the integrator.

    Trial stages may overshoot the u = 0 boundary by a rounding amount; u^m is taken
    as 0 there so that the stage stays finite and the event catches the crossing.

    Args:
        params (ModelParams): Exponent and branch.

    Returns:
        ArrayField: rhs(t, y).
    """
    m, s, p = params.m, params.sign, params.p

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        xi, u, w = y
        um = u**m if u > 0.0 else 0.0
        return np.array([um, w, um * (1.0 + s * u) - s * p * xi * w])

    return rhs


def far_field(params: ModelParams, reversed_clock: bool = False) -> ArrayField:
    """Far-field rhs for the integrator.

    Args:
        params (ModelParams): Exponent and branch.
        reversed_clock (bool): Negate the field (used with the t < 0 branch).

    Returns:
        ArrayField: rhs(t, y).
    """
    s, p, q = params.sign, params.p, params.q
    flip = -1.0 if reversed_clock else 1.0

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        x, yy, z = y
        pxz = p * x * z
        return flip * np.array([yy - pxz, -z * yy, yy * (s + yy) - s * pxz - q * z * z])

    return rhs


def near_to_far(params: ModelParams, state: StateLike) -> FarState:
    """Map (xi, u, w) to (x, y, z).

    Args:
        params (ModelParams): Exponent.
        state (StateLike): Near-field state with u > 0.

    Returns:
        FarState: x = xi u^-p, y = 1/u, z = w u^-q.

    Raises:
        DomainError: If u <= 0.
    """
    xi, u, w = _components(state)
    if not u > 0.0:
        raise DomainError(f"near_to_far is singular at u={u!r}")
    return FarState(x=xi * u ** (-params.p), y=1.0 / u, z=w * u ** (-params.q))


def far_to_near(params: ModelParams, state: StateLike) -> NearState:
    """Map (x, y, z) to (xi, u, w).

    Args:
        params (ModelParams): Exponent.
        state (StateLike): Far-field state with y > 0.

    Returns:
        NearState: xi = x y^-p, u = 1/y, w = z y^-q.

    Raises:
        DomainError: If y <= 0.
    """
    x, y, z = _components(state)
    if not y > 0.0:
        raise DomainError(f"far_to_near is singular at y={y!r}")
    return NearState(xi=x * y ** (-params.p), u=1.0 / y, w=z * y ** (-params.q))


def near_rows_to_far(params: ModelParams, rows: np.ndarray) -> np.ndarray:
    """Vectorised near_to_far on an (N, 3) array; NaN where u <= 0."""
    xi, u, w = rows[:, 0], rows[:, 1], rows[:, 2]
    out = np.full(rows.shape, np.nan)
    ok = u > 0.0
    out[ok, 0] = xi[ok] * u[ok] ** (-params.p)
    out[ok, 1] = 1.0 / u[ok]
    out[ok, 2] = w[ok] * u[ok] ** (-params.q)
    return out


def far_rows_to_near(params: ModelParams, rows: np.ndarray) -> np.ndarray:
    """Vectorised far_to_near on an (N, 3) array; NaN where y <= 0."""
    x, y, z = rows[:, 0], rows[:, 1], rows[:, 2]
    out = np.full(rows.shape, np.nan)
    ok = y > 0.0
    out[ok, 0] = x[ok] * y[ok] ** (-params.p)
    out[ok, 1] = 1.0 / y[ok]
    out[ok, 2] = z[ok] * y[ok] ** (-params.q)
    return out


def energy(params: ModelParams, state: StateLike) -> EnergyValue:
    """E = w^2/2 - u^(m+1)/(m+1) - u^(m+2)/(m+2).

    Args:
        params (ModelParams): Exponent.
        state (StateLike): Near-field state with u >= 0.

    Returns:
        EnergyValue: Energy of the state.
    """
    _, u, w = _components(state)
    m = params.m
    return EnergyValue(E=0.5 * w * w - u ** (m + 1.0) / (m + 1.0) - u ** (m + 2.0) / (m + 2.0))


def energy_rate(params: ModelParams, state: StateLike) -> float:
    """dE/dtau on the t > 0 branch, equal to -p xi w^2.

    Args:
        params (ModelParams): Exponent.
        state (StateLike): Near-field state.

    Returns:
        float: Energy dissipation rate.
    """
    xi, _, w = _components(state)
    return -params.p * xi * w * w
