"""Domain types shared by the dynamics, shooting, solver and export layers."""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.integrator.problem import IntegrationStats

Branch = Literal["plus", "minus"]
TerminationKind = Literal[
    "HitU0", "HitW0", "NearEquilibrium", "ForwardReadout", "Diverged", "BudgetExhausted"
]
SolutionKind = Literal["Reversing", "AntiReversing", "Stationary", "Mixed"]

FRAME_NEAR = 0.0
FRAME_FAR = 1.0
FRAME_LIFT = 2.0
FRAME_NAMES = {FRAME_NEAR: "near", FRAME_FAR: "far", FRAME_LIFT: "lift"}

# columns of ShotRecord.samples
SAMPLE_COLUMNS = ("clock", "frame", "xi", "u", "w", "x", "y", "z")


class ModelParams(BaseModel):
    """Diffusion exponent and time branch; every vector field is built from this."""

    model_config = ConfigDict(frozen=True)

    m: float = Field(gt=1.0, description="Diffusion exponent")
    branch: Branch

    @property
    def p(self) -> float:
        return 0.5 * (self.m + 1.0)

    @property
    def q(self) -> float:
        return 0.5 * (self.m + 3.0)

    @property
    def sign(self) -> float:
        """+1 for the t > 0 branch, -1 for t < 0."""
        return 1.0 if self.branch == "plus" else -1.0

    @property
    def x_q(self) -> float:
        """Far-field value of the stationary exact solution."""
        return math.sqrt(2.0 / (self.m + 1.0))

    def with_branch(self, branch: Branch) -> "ModelParams":
        return ModelParams(m=self.m, branch=branch)


class NearState(BaseModel):
    model_config = ConfigDict(frozen=True)

    xi: float
    u: float = Field(ge=0.0)
    w: float

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.u, self.w])

    @classmethod
    def from_array(cls, values: Any) -> "NearState":
        xi, u, w = (float(v) for v in values)
        return cls(xi=xi, u=max(u, 0.0), w=w)


class FarState(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    y: float = Field(ge=0.0)
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, values: Any) -> "FarState":
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=max(y, 0.0), z=z)


class EnergyValue(BaseModel):
    E: float


class Termination(BaseModel):
    """How a shot ended.

    value holds w for HitU0, u for HitW0, the equilibrium coordinate for
    NearEquilibrium and the x0 estimate for ForwardReadout, the end of a t > 0 shot.
    It is NaN for the non-evaluable kinds.
    """

    kind: TerminationKind
    at_time: float
    xi: float = math.nan
    u: float = math.nan
    w: float = math.nan
    value: float = math.nan
    leg: Literal["far", "near", "lift"] = "near"

    @property
    def evaluable(self) -> bool:
        return self.kind in ("HitU0", "HitW0", "NearEquilibrium", "ForwardReadout")


class ShotRecord(BaseModel):
    """Immutable result of one shot.

    samples has one row per stored point with columns SAMPLE_COLUMNS; each row is
    filled in both frames where the transform is defined and NaN elsewhere.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: ModelParams
    seed: float
    seed_kind: Literal["x0", "a_plus"]
    termination: Termination
    samples: np.ndarray
    stats: IntegrationStats = Field(default_factory=IntegrationStats)
    x0_estimate: Optional[float] = None
    x0_raw: Optional[float] = None

    def near_trajectory(self) -> np.ndarray:
        """(clock, xi, u, w) rows recorded in the near frame, lift included."""
        rows = self.samples[self.samples[:, 1] != FRAME_FAR]
        return rows[:, [0, 2, 3, 4]]

    def far_trace(self) -> np.ndarray:
        """(clock, x, y, z) rows recorded in the far frame."""
        rows = self.samples[self.samples[:, 1] == FRAME_FAR]
        return rows[:, [0, 5, 6, 7]]

    def xi_u_curve(self) -> Tuple[np.ndarray, np.ndarray]:
        """(xi, u) over every sample where both are defined, in sample order."""
        xi, u = self.samples[:, 2], self.samples[:, 3]
        mask = np.isfinite(xi) & np.isfinite(u)
        return xi[mask], u[mask]

    def uz_trace(self) -> np.ndarray:
        """(xi, u*z) along the far-frame part of the shot."""
        rows = self.samples[self.samples[:, 1] == FRAME_FAR]
        return np.column_stack([rows[:, 2], rows[:, 3] * rows[:, 7]])


class ConnectionMapSample(BaseModel):
    sweep_var: float
    kind: str
    xi_term: float = math.nan
    val_term: float = math.nan
    x0_estimate: Optional[float] = None


class Profile(BaseModel):
    """Sampled H(xi), strictly increasing in both coordinates, starting at (A, 0)."""

    xi: List[float]
    h: List[float]

    @model_validator(mode="after")
    def validate_monotone(self) -> "Profile":
        """Validate equal lengths and strict monotonicity.

        Returns:
            Profile: Self for chaining.

        Raises:
            ValueError: If the samples are not strictly increasing.
        """
        if len(self.xi) != len(self.h):
            raise ValueError("Profile xi and h must have equal length")
        if len(self.xi) > 1:
            if np.any(np.diff(self.xi) <= 0.0) or np.any(np.diff(self.h) <= 0.0):
                raise ValueError("Profile samples must be strictly increasing")
        return self


class SimilaritySolution(BaseModel):
    m: float
    A_minus: float
    A_plus: float
    x0_star: float
    kind: SolutionKind
    rejected: bool = False
    x0_check: Optional[float] = None
    a_minus_method: str = "closed-form"
    profile_minus: Profile
    profile_plus: Profile

    @property
    def p(self) -> float:
        return 0.5 * (self.m + 1.0)

    def summary(self) -> Dict[str, Any]:
        """Scalar fields without the profiles."""
        return self.model_dump(exclude={"profile_minus", "profile_plus"})


class SkippedBracket(BaseModel):
    """A detected sign change that produced no solution."""

    lo: float
    hi: float
    stage: Literal["split", "refine", "match"]
    code: str
    message: str


class SolveReport(BaseModel):
    m: float
    solutions: List[SimilaritySolution]
    skipped: List[SkippedBracket] = Field(default_factory=list)


class BranchPoint(BaseModel):
    m: float
    x0_star: float
    A_minus: float
    branch_label: str
    event: Literal["continued", "birth", "break"] = "continued"


class FieldFrame(BaseModel):
    t: float
    x: List[float]
    h: List[float]
    ell: float

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.x, self.h))


class WaveformReport(BaseModel):
    t: float
    regime: Literal["advancing", "receding", "stationary"]
    alpha: float
    expected_alpha: float
    prefactor: float
    n_samples: int
    passed: bool


class RunManifest(BaseModel):
    schema_version: int = 1
    tool_version: str
    command: str
    command_line: List[str]
    config: Dict[str, Any]
    input_hash: str
    wall_time_s: float
    shot_stats: Dict[str, Dict[str, float]]
    outputs: List[str] = Field(default_factory=list)
