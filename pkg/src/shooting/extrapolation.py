"""Recovery of the t < 0 interface coordinate from a returning trajectory."""

from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from src.model.domain import ShotRecord
from src.model.exceptions import ExtrapolationError
from src.utils.logger import get_logger

logger = get_logger(__name__)

MIN_FIT_SAMPLES = 8
MAX_RELATIVE_RESIDUAL = 0.05
DEFAULT_WINDOW = (0.05, 0.25)


def near_frame_curve(record: ShotRecord) -> Tuple[np.ndarray, np.ndarray]:
    """(xi, u) samples of the near leg, ordered along the shot.

    Args:
        record (ShotRecord): Backward shot.

    Returns:
        Tuple[np.ndarray, np.ndarray]: xi and u arrays.
    """
    rows = record.near_trajectory()
    return rows[:, 1], rows[:, 2]


def extrapolate_A_minus(
    record: ShotRecord,
    fit_window: Optional[Tuple[float, float]] = None,
    degree: int = 1,
) -> float:
    """Extrapolate the returning near leg to u = 0.

    Degree 1 fits u as a line in xi and returns its xi-intercept. Higher degrees fit
    xi as a polynomial in u and evaluate it at u = 0.

    Args:
        record (ShotRecord): Backward shot whose near leg approaches the xi-axis.
        fit_window (Optional[Tuple[float, float]]): (u_lo, u_hi); defaults to
            (0.05, 0.25) times the largest u on the near leg.
        degree (int): Polynomial degree.

    Returns:
        float: Estimated interface coordinate.

    Raises:
        ExtrapolationError: With fewer than 8 samples in the window or a residual
            above 5% of the window height.
    """
    xi, u = near_frame_curve(record)
    if fit_window is None:
        u_max = float(np.max(u)) if len(u) else 0.0
        fit_window = (DEFAULT_WINDOW[0] * u_max, DEFAULT_WINDOW[1] * u_max)
    u_lo, u_hi = fit_window
    mask = (u >= u_lo) & (u <= u_hi)
    count = int(np.count_nonzero(mask))
    if count < MIN_FIT_SAMPLES:
        raise ExtrapolationError(
            f"Only {count} samples in u-window [{u_lo!r}, {u_hi!r}]",
            {"window": [u_lo, u_hi], "samples": count},
        )
    xi_w, u_w = xi[mask], u[mask]

    if degree == 1:
        coef = P.polyfit(xi_w, u_w, 1)
        if coef[1] == 0.0:
            raise ExtrapolationError("Flat fit has no xi-intercept", {"window": [u_lo, u_hi]})
        residual = float(np.max(np.abs(P.polyval(xi_w, coef) - u_w)))
        height = u_hi - u_lo
        intercept = -coef[0] / coef[1]
    else:
        coef = P.polyfit(u_w, xi_w, degree)
        residual = float(np.max(np.abs(P.polyval(u_w, coef) - xi_w)))
        height = float(np.ptp(xi_w))
        intercept = coef[0]

    if height > 0.0 and residual > MAX_RELATIVE_RESIDUAL * height:
        raise ExtrapolationError(
            f"Fit residual {residual!r} exceeds 5% of window height {height!r}",
            {"window": [u_lo, u_hi], "residual": residual, "degree": degree},
        )
    logger.debug(
        f"Extrapolated A={intercept!r} from {count} samples in [{u_lo!r}, {u_hi!r}] "
        f"(degree {degree}, residual {residual!r})"
    )
    return float(intercept)
