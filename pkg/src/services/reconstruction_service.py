"""Physical-space reconstruction of h(x, t) from matched similarity profiles."""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.model.domain import FieldFrame, Profile, SimilaritySolution, WaveformReport
from src.model.exceptions import DomainError, InsufficientSamplesError
from src.utils.logger import get_logger

logger = get_logger(__name__)

MIN_WAVEFORM_SAMPLES = 20
WAVEFORM_TOLERANCE = 0.10
NOSE_WINDOW = 0.05


def evaluate_profile(
    profile: Profile, xi: Union[float, np.ndarray], x0_star: float, m: float
) -> np.ndarray:
    """Evaluate a sampled H at arbitrary xi.

    Between samples H is interpolated linearly in log(xi - A) against log H, which keeps
    it monotone and exact on power laws. Below the first sample the first segment's
    power law continues down to H(A) = 0; above the last sample the far-field law
    (xi / x0*)^(2/(m+1)) takes over.

    Args:
        profile (Profile): Samples starting at (A, 0).
        xi (Union[float, np.ndarray]): Similarity coordinate(s).
        x0_star (float): Far-field constant of the solution.
        m (float): Diffusion exponent.

    Returns:
        np.ndarray: H values, zero for xi <= A.
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    xs = np.asarray(profile.xi, dtype=float)
    hs = np.asarray(profile.h, dtype=float)
    a = xs[0]
    out = np.zeros_like(xi_arr)

    far_exp = 2.0 / (m + 1.0)
    beyond = xi_arr > xs[-1]
    out[beyond] = (xi_arr[beyond] / x0_star) ** far_exp

    inside = (xi_arr > a) & ~beyond
    if not np.any(inside):
        return out
    if len(xs) < 2:
        out[inside] = (xi_arr[inside] / x0_star) ** far_exp
        return out

    log_d = np.log(xs[1:] - a)
    log_h = np.log(hs[1:])
    d = np.log(xi_arr[inside] - a)
    if len(log_d) >= 2:
        slope = (log_h[1] - log_h[0]) / (log_d[1] - log_d[0])
    else:
        slope = far_exp
    values = np.interp(d, log_d, log_h)
    below = d < log_d[0]
    values[below] = log_h[0] + slope * (d[below] - log_d[0])
    out[inside] = np.exp(values)
    return out


def _power_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least-squares slope and prefactor of y = C x^alpha."""
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(np.exp(intercept))


class ReconstructionService:
    """Service for rebuilding and checking h(x, t) from similarity solutions."""

    def __init__(self):
        """Initialize reconstruction service."""
        self.logger = get_logger(__name__)

    def reconstruct_h(
        self, solution: SimilaritySolution, t_list: Sequence[float], x_grid: Sequence[float]
    ) -> List[FieldFrame]:
        """Rebuild h(x, t) = |t| H(x |t|^(-(m+1)/2)) at each requested time.

        Args:
            solution (SimilaritySolution): Matched solution with both profiles.
            t_list (Sequence[float]): Nonzero times; t < 0 uses the minus profile.
            x_grid (Sequence[float]): Physical coordinates.

        Returns:
            List[FieldFrame]: One frame per time, interface at A |t|^((m+1)/2).

        Raises:
            DomainError: If any t is zero.
        """
        x = np.asarray(x_grid, dtype=float)
        p = solution.p
        frames = []
        for t in t_list:
            if t == 0.0:
                raise DomainError("Reconstruction is undefined at t = 0")
            if t < 0.0:
                profile, a = solution.profile_minus, solution.A_minus
            else:
                profile, a = solution.profile_plus, solution.A_plus
            scale = abs(t) ** p
            h = abs(t) * evaluate_profile(profile, x / scale, solution.x0_star, solution.m)
            frames.append(FieldFrame(t=float(t), x=x.tolist(), h=h.tolist(), ell=a * scale))
        self.logger.info(f"Reconstructed {len(frames)} frame(s) on {len(x)} points")
        return frames

    def verify_local_waveforms(
        self,
        frame: FieldFrame,
        m: float,
        direction: float,
        window: Optional[float] = None,
    ) -> WaveformReport:
        """Fit h ~ C (x - ell)^alpha next to the interface and check the exponent.

        An advancing interface (d ell/dt < 0 for a left interface) carries the nonlinear
        nose alpha = 1/m, a receding one the linear nose alpha = 1, and a fixed one the
        stationary exponent 2/(m+1).

        Args:
            frame (FieldFrame): Reconstructed frame.
            m (float): Diffusion exponent.
            direction (float): Sign of d ell/dt.
            window (Optional[float]): Width of the fit window beyond ell; defaults to
                5% of |ell|, or of the frame extent when ell = 0.

        Returns:
            WaveformReport: Fitted and expected exponents.

        Raises:
            InsufficientSamplesError: With fewer than 20 samples in the window.
        """
        x = np.asarray(frame.x, dtype=float)
        h = np.asarray(frame.h, dtype=float)
        if window is None:
            extent = abs(frame.ell) if frame.ell != 0.0 else float(np.max(x) - frame.ell)
            window = NOSE_WINDOW * extent
        mask = (x > frame.ell) & (x - frame.ell <= window) & (h > 0.0)
        count = int(np.count_nonzero(mask))
        if count < MIN_WAVEFORM_SAMPLES:
            raise InsufficientSamplesError(
                MIN_WAVEFORM_SAMPLES, count, f"(ell, ell + {window!r}) at t={frame.t!r}"
            )

        if direction < 0.0:
            regime, expected = "advancing", 1.0 / m
        elif direction > 0.0:
            regime, expected = "receding", 1.0
        else:
            regime, expected = "stationary", 2.0 / (m + 1.0)

        alpha, prefactor = _power_fit(x[mask] - frame.ell, h[mask])
        passed = abs(alpha - expected) <= WAVEFORM_TOLERANCE * expected
        log_fn = self.logger.info if passed else self.logger.warning
        log_fn(f"t={frame.t!r}: {regime} nose alpha={alpha:.4f} (expected {expected:.4f})")
        return WaveformReport(
            t=frame.t,
            regime=regime,
            alpha=alpha,
            expected_alpha=expected,
            prefactor=prefactor,
            n_samples=count,
            passed=passed,
        )

    @staticmethod
    def interface_direction(solution: SimilaritySolution, t: float) -> float:
        """Sign of d ell/dt: -sign(A_minus) before the reversal, sign(A_plus) after."""
        if t < 0.0:
            return -float(np.sign(solution.A_minus))
        return float(np.sign(solution.A_plus))

    def frame_continuity_gap(
        self, before: FieldFrame, after: FieldFrame, x_min: Optional[float] = None
    ) -> float:
        """Largest relative gap between two frames on their common support.

        Args:
            before (FieldFrame): Frame at t < 0.
            after (FieldFrame): Frame at t > 0 on the same grid.
            x_min (Optional[float]): Ignore points left of this coordinate.

        Returns:
            float: max |h+ - h-| / max(h+, h-) where both are positive.

        Raises:
            DomainError: If the frames use different grids.
        """
        if before.x != after.x:
            raise DomainError("Frames must share the same x grid")
        x = np.asarray(before.x)
        h_minus = np.asarray(before.h)
        h_plus = np.asarray(after.h)
        mask = (h_minus > 0.0) & (h_plus > 0.0)
        if x_min is not None:
            mask &= x >= x_min
        if not np.any(mask):
            return 0.0
        gap = np.abs(h_plus[mask] - h_minus[mask]) / np.maximum(h_plus[mask], h_minus[mask])
        return float(np.max(gap))

    def interface_exponent(self, frames: Sequence[FieldFrame]) -> Dict[str, float]:
        """Fitted exponent of |ell| against |t| on each side of the reversal.

        Args:
            frames (Sequence[FieldFrame]): Reconstructed frames.

        Returns:
            Dict[str, float]: Slopes keyed "minus" and "plus" for sides with at least two
                distinct times and a moving interface.
        """
        result: Dict[str, float] = {}
        for side, select in (("minus", lambda t: t < 0.0), ("plus", lambda t: t > 0.0)):
            pts = sorted({(abs(f.t), abs(f.ell)) for f in frames if select(f.t) and f.ell != 0.0})
            if len(pts) >= 2:
                t_abs, ell_abs = (np.asarray(v) for v in zip(*pts))
                result[side] = _power_fit(t_abs, ell_abs)[0]
        return result
