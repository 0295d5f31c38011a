import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Command = Literal[
    "shoot-minus",
    "shoot-plus",
    "find",
    "match",
    "trace-map",
    "sweep",
    "solve",
    "reconstruct",
    "verify-exact",
]


class IntegrationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rtol: float = Field(default=1e-10, gt=0.0, description="Relative tolerance per step")
    atol: float = Field(default=1e-10, gt=0.0, description="Absolute tolerance per step")
    h_init: float = Field(default=1e-3, gt=0.0, description="Initial step magnitude")
    h_min: float = Field(default=1e-14, gt=0.0, description="Step floor; below it StepFloor")
    h_max: float = Field(default=1e10, gt=0.0, description="Step ceiling")
    max_steps: int = Field(default=200_000, gt=0, description="Accepted step budget")
    event_tol: float = Field(default=1e-12, gt=0.0, description="Event bracket width")
    refine: int = Field(default=1, ge=1, description="Dense samples emitted per accepted step")

    @model_validator(mode="after")
    def validate_step_bounds(self) -> "IntegrationConfig":
        """Validate that h_min <= h_init <= h_max.

        Returns:
            IntegrationConfig: Self for chaining.

        Raises:
            ValueError: If the step bounds are out of order.
        """
        if not self.h_min <= self.h_init <= self.h_max:
            raise ValueError(
                f"Require h_min <= h_init <= h_max, got {self.h_min}, {self.h_init}, {self.h_max}"
            )
        return self


class ShootConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float = Field(default=5e-3, gt=0.0, le=0.1, description="Far-field seed offset")
    eps: float = Field(default=1e-6, gt=0.0, lt=1.0, description="Near-field seed offset")
    switch_xi: float = Field(default=20.0, gt=1.0, description="Frame-switch threshold in xi")
    tau_inf: float = Field(default=1e4, ge=1e3, description="Forward-shot clock horizon")
    eq_tol: float = Field(default=1e-8, gt=0.0, description="Equilibrium proximity threshold")
    u_floor: float = Field(default=1e-12, gt=0.0, description="u level treated as u = 0")
    overflow: float = Field(default=1e12, gt=0.0, description="Component magnitude guard")
    z_stop: float = Field(default=1e-3, gt=0.0, lt=1.0, description="Far-field readiness in z")
    lift_budget: int = Field(
        default=2000, gt=0, description="Explicit steps allowed after the slow-manifold lift"
    )
    integ: IntegrationConfig = Field(default_factory=IntegrationConfig)

    def with_tolerance(self, rtol: float, atol: Optional[float] = None) -> "ShootConfig":
        """Return a copy with different integration tolerances.

        Args:
            rtol (float): Relative tolerance.
            atol (Optional[float]): Absolute tolerance, defaults to rtol.

        Returns:
            ShootConfig: Updated copy.
        """
        integ = self.integ.model_copy(update={"rtol": rtol, "atol": rtol if atol is None else atol})
        return self.model_copy(update={"integ": integ})

    def fingerprint(self) -> str:
        """Canonical JSON used as a cache key component.

        Returns:
            str: JSON dump of the config.
        """
        return self.model_dump_json()


class SearchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    x0_min: float = Field(default=0.02, gt=0.0, description="Lower end of the x0 scan")
    x0_max: float = Field(default=3.0, gt=0.0, description="Upper end of the x0 scan")
    points_per_decade: int = Field(default=400, ge=2, description="Log-spaced scan density")
    cluster_x_q: bool = Field(default=True, description="Add scan points clustered around x_Q")
    scan_rtol: float = Field(default=1e-8, gt=0.0, description="Tolerance for scan shots")
    bisect_rel_width: float = Field(default=1e-13, gt=0.0, description="Bisection stop width")
    match_tol: float = Field(default=1e-8, gt=0.0, description="|x0 - target| for matching")
    match_max_iter: int = Field(default=100, gt=0)
    extrapolation_degree: int = Field(default=2, ge=1, le=3)
    landing_tol: float = Field(default=1e-6, gt=0.0, description="Terminal proximity for A readout")
    stationary_tol: float = Field(default=1e-8, gt=0.0, description="Relative x_Q proximity")
    include_stationary: bool = Field(default=False)
    profile_xi_max: float = Field(default=1e6, gt=0.0, description="Profile sampling cap in xi")

    @model_validator(mode="after")
    def validate_scan_range(self) -> "SearchConfig":
        """Validate the scan range ordering.

        Returns:
            SearchConfig: Self for chaining.

        Raises:
            ValueError: If x0_min >= x0_max.
        """
        if self.x0_min >= self.x0_max:
            raise ValueError(f"x0_min must be below x0_max, got {self.x0_min}, {self.x0_max}")
        return self


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    m_lo: float = Field(gt=1.0, le=8.0)
    m_hi: float = Field(gt=1.0, le=8.0)
    m_step: float = Field(default=0.05, gt=0.0)
    points_per_decade: int = Field(default=40, ge=2, description="Fresh scan density per m")
    continuation_window: float = Field(
        default=0.05, gt=0.0, lt=1.0, description="Relative bracket around previous roots"
    )

    @model_validator(mode="after")
    def validate_m_range(self) -> "SweepConfig":
        """Validate that the m range is ordered.

        Returns:
            SweepConfig: Self for chaining.

        Raises:
            ValueError: If m_lo > m_hi.
        """
        if self.m_lo > self.m_hi:
            raise ValueError(f"m_lo must not exceed m_hi, got {self.m_lo}, {self.m_hi}")
        return self

    def m_values(self) -> List[float]:
        """Sweep grid from m_lo to m_hi inclusive.

        Returns:
            List[float]: m values, rounded to suppress step accumulation.
        """
        count = int(math.floor((self.m_hi - self.m_lo) / self.m_step + 1e-9)) + 1
        return [round(self.m_lo + k * self.m_step, 12) for k in range(count)]


class RunConfig(BaseModel):
    command: Command
    m: Optional[float] = Field(default=None, gt=1.0, description="Diffusion exponent")
    branch: Optional[Literal["plus", "minus"]] = None
    x0: Optional[float] = Field(default=None, gt=0.0)
    a_plus: Optional[float] = None
    bracket: Optional[Tuple[float, float]] = None
    grid: Optional[int] = Field(default=None, ge=0)
    m_range: Optional[Tuple[float, float]] = None
    m_step: float = Field(default=0.05, gt=0.0)
    times: List[float] = Field(default_factory=lambda: [-1e-3, 1e-3])
    x_range: Optional[Tuple[float, float]] = None
    solution_index: int = Field(default=0, ge=0)
    shoot: ShootConfig = Field(default_factory=ShootConfig)
    search: SearchConfig = Field(default_factory=SearchConfig)
    out: Optional[str] = None
    format: Literal["csv", "json"] = "json"
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def validate_finite(self) -> "RunConfig":
        """Validate that every numeric command parameter is finite.

        Returns:
            RunConfig: Self for chaining.

        Raises:
            ValueError: If a parameter is NaN or infinite.
        """
        values: List[Any] = [self.m, self.x0, self.a_plus, self.m_step, *self.times]
        for pair in (self.bracket, self.m_range, self.x_range):
            if pair is not None:
                values.extend(pair)
        for value in values:
            if value is not None and not math.isfinite(value):
                raise ValueError(f"Numeric parameters must be finite, got {value}")
        return self

    @model_validator(mode="after")
    def validate_command_arguments(self) -> "RunConfig":
        """Validate that each command has the parameters it needs.

        Returns:
            RunConfig: Self for chaining.

        Raises:
            ValueError: If a required parameter is missing.
        """
        needs_m = self.command not in ("sweep",)
        if needs_m and self.m is None:
            raise ValueError(f"Command '{self.command}' requires --m")
        if self.command == "shoot-minus" and self.x0 is None:
            raise ValueError("Command 'shoot-minus' requires --x0")
        if self.command == "shoot-plus" and not self.a_plus:
            raise ValueError("Command 'shoot-plus' requires a nonzero --a-plus")
        if self.command == "find" and self.bracket is None:
            raise ValueError("Command 'find' requires --bracket LO HI")
        if self.command == "match" and self.x0 is None:
            raise ValueError("Command 'match' requires --x0 (the target)")
        if self.command == "sweep" and self.m_range is None:
            raise ValueError("Command 'sweep' requires --m-range LO HI")
        if self.command == "reconstruct" and any(t == 0.0 for t in self.times):
            raise ValueError("Reconstruction times must be nonzero")
        return self


def validate_run_config(config: Dict[str, Any]) -> RunConfig:
    """Validate a run configuration dictionary using Pydantic.

    Args:
        config (Dict[str, Any]): Configuration dictionary.

    Returns:
        RunConfig: Validated RunConfig object.

    Raises:
        ValidationError: If config is invalid.
    """
    return RunConfig.model_validate(config)
