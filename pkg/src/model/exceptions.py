"""Custom exceptions for the solver stack."""

from typing import Any, Dict, Optional


class SolverException(Exception):
    """Base exception for solver errors."""

    def __init__(
        self, code: str, message: str, exit_code: int = 1, details: Optional[Dict[str, Any]] = None
    ):
        """Initialize solver exception.

        Args:
            code (str): Error code.
            message (str): Error message.
            exit_code (int): Process exit code the CLI reports for this error.
            details (Optional[Dict[str, Any]]): Additional error details.
        """
        self.code = code
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the error for JSON reports.

        Returns:
            Dict[str, Any]: Code, message and details.
        """
        return {"code": self.code, "message": self.message, "details": self.details}


class DomainError(SolverException):
    """Raised when an operation is evaluated outside its mathematical domain."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """Initialize domain error.

        Args:
            message (str): Error message.
            details (Optional[Dict[str, Any]]): Additional details.
        """
        super().__init__(code="DOMAIN_ERROR", message=message, details=details)


class NonFiniteStepError(SolverException):
    """Raised when a Runge-Kutta stage evaluates to a non-finite value."""

    def __init__(self, t: float, h: float):
        """Initialize non-finite step error.

        Args:
            t (float): Step start.
            h (float): Attempted step size.
        """
        super().__init__(
            code="NON_FINITE",
            message=f"Non-finite stage in step from t={t!r} with h={h!r}",
            details={"t": t, "h": h},
        )


class NonEvaluableShotError(SolverException):
    """Raised when a shot diverges or exhausts its budget and has no readout."""

    def __init__(self, seed: float, kind: str, seed_name: str = "x0", record: Any = None):
        """Initialize non-evaluable shot error.

        Args:
            seed (float): Seed parameter of the shot.
            kind (str): Termination kind that prevented evaluation.
            seed_name (str): Name of the seed parameter ("x0" or "a_plus").
            record (Any): The shot record, kept for inspection.
        """
        self.record = record
        super().__init__(
            code="NON_EVALUABLE_SHOT",
            message=f"Shot at {seed_name}={seed!r} ended with {kind}; no readout",
            details={seed_name: seed, "kind": kind},
        )


class NoSignChangeError(SolverException):
    """Raised when a bracket does not enclose a classification boundary."""

    def __init__(self, lo: float, hi: float, r_lo: float, r_hi: float):
        """Initialize no-sign-change error.

        Args:
            lo (float): Lower bracket end.
            hi (float): Upper bracket end.
            r_lo (float): Residual at lo.
            r_hi (float): Residual at hi.
        """
        super().__init__(
            code="NO_SIGN_CHANGE",
            message=f"Residual has the same sign on [{lo!r}, {hi!r}] ({r_lo!r}, {r_hi!r})",
            details={"lo": lo, "hi": hi, "r_lo": r_lo, "r_hi": r_hi},
        )


class AmbiguousRootError(SolverException):
    """Raised when a bisection midpoint inside a bracket cannot be evaluated."""

    def __init__(self, x0: float, lo: float, hi: float):
        """Initialize ambiguous root error.

        Args:
            x0 (float): Midpoint that failed.
            lo (float): Current lower bracket end.
            hi (float): Current upper bracket end.
        """
        super().__init__(
            code="AMBIGUOUS_ROOT",
            message=f"Non-evaluable midpoint x0={x0!r} inside bracket [{lo!r}, {hi!r}]",
            details={"x0": x0, "lo": lo, "hi": hi},
        )


class ExtrapolationError(SolverException):
    """Raised when the near-equilibrium fit is not trustworthy."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """Initialize extrapolation error.

        Args:
            message (str): Error message.
            details (Optional[Dict[str, Any]]): Additional details.
        """
        super().__init__(code="EXTRAPOLATION_FAILED", message=message, details=details)


class NoStraddleError(SolverException):
    """Raised when forward-shot estimates at a bracket do not straddle the target."""

    def __init__(self, target: float, bracket: Any, values: Any):
        """Initialize no-straddle error.

        Args:
            target (float): Target far-field value.
            bracket (Any): The (A_lo, A_hi) bracket.
            values (Any): Forward-shot estimates at the bracket ends.
        """
        super().__init__(
            code="NO_STRADDLE",
            message=f"x0 estimates {values} at {bracket} do not straddle {target!r}",
            details={"target": target, "bracket": list(bracket), "values": list(values)},
        )


class SignConsistencyError(SolverException):
    """Raised when a bracket sign contradicts the side of x_Q the target lies on."""

    def __init__(self, target: float, x_q: float, bracket: Any):
        """Initialize sign-consistency error.

        Args:
            target (float): Target far-field value.
            x_q (float): Stationary far-field value for this m.
            bracket (Any): The (A_lo, A_hi) bracket.
        """
        super().__init__(
            code="SIGN_INCONSISTENT",
            message=f"Bracket {bracket} has the wrong sign for target {target!r} (x_Q={x_q!r})",
            details={"target": target, "x_q": x_q, "bracket": list(bracket)},
        )


class ShotAssertionError(SolverException):
    """Raised when a forward shot violates a monotonicity it must satisfy."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """Initialize shot assertion error.

        Args:
            message (str): Error message.
            details (Optional[Dict[str, Any]]): Additional details.
        """
        super().__init__(code="SHOT_ASSERTION", message=message, details=details)


class InsufficientSamplesError(SolverException):
    """Raised when a fit window holds too few samples."""

    def __init__(self, needed: int, found: int, where: str):
        """Initialize insufficient samples error.

        Args:
            needed (int): Minimum sample count.
            found (int): Samples available.
            where (str): Description of the window.
        """
        super().__init__(
            code="INSUFFICIENT_SAMPLES",
            message=f"Need {needed} samples in {where}, found {found}",
            details={"needed": needed, "found": found},
        )


class UsageError(SolverException):
    """Raised for invalid command-line usage."""

    def __init__(self, message: str):
        """Initialize usage error.

        Args:
            message (str): Error message.
        """
        super().__init__(code="USAGE_ERROR", message=message, exit_code=2)


class MatchNotConvergedError(SolverException):
    """Raised when matching stops without reaching the target within tolerance."""

    def __init__(self, target: float, a_plus: float, gap: float, bracket: Any):
        """Initialize match-not-converged error.

        Args:
            target (float): Target far-field value.
            a_plus (float): Best A+ found.
            gap (float): |x0 - target| at the best A+.
            bracket (Any): Final (A_lo, A_hi) bracket.
        """
        super().__init__(
            code="MATCH_NOT_CONVERGED",
            message=f"Best A+={a_plus!r} misses target {target!r} by {gap!r}",
            details={"target": target, "a_plus": a_plus, "gap": gap, "bracket": list(bracket)},
        )


class UnresolvedBoundaryError(SolverException):
    """Raised when sign changes were found but none of them yielded a solution."""

    def __init__(self, m: float, skipped: Any):
        """Initialize unresolved-boundary error.

        Args:
            m (float): Diffusion exponent.
            skipped (Any): Plain dicts describing each failed bracket.
        """
        super().__init__(
            code="UNRESOLVED_BOUNDARIES",
            message=f"m={m!r}: {len(skipped)} classification boundary bracket(s) failed",
            details={"m": m, "skipped": list(skipped)},
        )
