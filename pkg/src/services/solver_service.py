"""Root finding on the connection maps, matching, and branch sweeps."""

import functools
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel

from src.dynamics.exact import exact_stationary_profile
from src.model.config_schema_model import SearchConfig, ShootConfig, SweepConfig
from src.model.domain import (
    BranchPoint,
    ConnectionMapSample,
    ModelParams,
    Profile,
    ShotRecord,
    SimilaritySolution,
    SkippedBracket,
    SolveReport,
)
from src.model.exceptions import (
    AmbiguousRootError,
    DomainError,
    ExtrapolationError,
    MatchNotConvergedError,
    NoSignChangeError,
    NonEvaluableShotError,
    NoStraddleError,
    ShotAssertionError,
    SignConsistencyError,
    SolverException,
    UnresolvedBoundaryError,
)
from src.shooting.extrapolation import extrapolate_A_minus, near_frame_curve
from src.shooting.shots import shoot_minus, shoot_plus
from src.utils.cache_manager import get_cache_manager
from src.utils.logger import get_logger
from src.utils.performance import (
    clear_metrics,
    get_all_metrics,
    merge_metrics,
    timing_decorator,
)

logger = get_logger(__name__)

T = TypeVar("T")

DENSE_REFINE = 8
SEPARATION_TOL = 1e-4
WINDOW_FACTORS = (1.3, 3.0)
BRACKET_DOUBLINGS = 14
A_PLUS_INNER = 1e-4


class BoundaryRoot(BaseModel):
    """A refined classification boundary with its interface coordinate."""

    x0_star: float
    A_minus: float
    method: str
    record_lo: Optional[ShotRecord] = None
    record_hi: Optional[ShotRecord] = None


def cached_shoot_minus(params: ModelParams, x0: float, cfg: ShootConfig) -> ShotRecord:
    """shoot_minus memoised on (m, x0, config)."""
    cache = get_cache_manager()
    key = (params.m, float(x0), cfg.fingerprint())
    record = cache.get("minus_shots", key)
    if record is None:
        record = shoot_minus(params, x0, cfg)
        cache.set("minus_shots", key, record)
    return record


def cached_shoot_plus(
    params: ModelParams, a_plus: float, cfg: ShootConfig
) -> Tuple[float, ShotRecord]:
    """shoot_plus memoised on (m, a_plus, config)."""
    cache = get_cache_manager()
    key = (params.m, float(a_plus), cfg.fingerprint())
    result = cache.get("plus_shots", key)
    if result is None:
        result = shoot_plus(params, a_plus, cfg)
        cache.set("plus_shots", key, result)
    return result


def _pooled_call(
    func: Callable[[Any], T], item: Any
) -> Tuple[T, Dict[str, List[float]], Dict[str, List[Tuple[Any, Any]]]]:
    """Run func in a worker and return its result with the metrics and shots it made."""
    cache = get_cache_manager()
    clear_metrics()
    cache.clear()
    result = func(item)
    return result, get_all_metrics(), cache.export_entries()


def residual_from_record(record: ShotRecord) -> float:
    """Signed residual: +u for HitW0, -w for HitU0, 0 at the equilibrium.

    Args:
        record (ShotRecord): Backward shot.

    Returns:
        float: Signed residual.

    Raises:
        NonEvaluableShotError: For Diverged and BudgetExhausted shots.
    """
    term = record.termination
    if term.kind == "HitW0":
        return abs(term.value)
    if term.kind == "HitU0":
        return -abs(term.value)
    if term.kind == "NearEquilibrium":
        return 0.0
    raise NonEvaluableShotError(record.seed, term.kind, "x0", record)


def minus_map_sample(params: ModelParams, cfg: ShootConfig, x0: float) -> ConnectionMapSample:
    """One point of the backward connection map; non-evaluable shots become gaps."""
    term = cached_shoot_minus(params, x0, cfg).termination
    return ConnectionMapSample(sweep_var=x0, kind=term.kind, xi_term=term.xi, val_term=term.value)


def plus_map_sample(params: ModelParams, cfg: ShootConfig, a_plus: float) -> ConnectionMapSample:
    """One point of the forward map A+ -> x0; failures become gaps."""
    try:
        estimate, record = cached_shoot_plus(params, a_plus, cfg)
    except NonEvaluableShotError as exc:
        return ConnectionMapSample(sweep_var=a_plus, kind=str(exc.details.get("kind")))
    except ShotAssertionError:
        return ConnectionMapSample(sweep_var=a_plus, kind="AssertionFailed")
    term = record.termination
    return ConnectionMapSample(
        sweep_var=a_plus,
        kind=term.kind,
        xi_term=term.xi,
        val_term=estimate,
        x0_estimate=estimate,
    )


def sample_residual(sample: ConnectionMapSample) -> Optional[float]:
    """Signed residual of a backward map sample, None for gaps."""
    if sample.kind == "HitW0":
        return abs(sample.val_term)
    if sample.kind == "HitU0":
        return -abs(sample.val_term)
    if sample.kind == "NearEquilibrium":
        return 0.0
    return None


def _strictly_decreasing(u: np.ndarray) -> np.ndarray:
    """Indices of the samples that keep u strictly decreasing."""
    keep = []
    current = math.inf
    for i, value in enumerate(u):
        if value < current:
            keep.append(i)
            current = value
    return np.asarray(keep, dtype=int)


def separation_amplitude(record_a: ShotRecord, record_b: ShotRecord) -> Optional[float]:
    """Largest u at which the near legs of two limiting shots visibly part.

    Both near legs are parameterised by u; xi of the second is interpolated in log u
    onto the first's samples.

    Args:
        record_a (ShotRecord): First limiting shot.
        record_b (ShotRecord): Second limiting shot.

    Returns:
        Optional[float]: Separation amplitude, None when the legs share no u range.
    """
    xa, ua = near_frame_curve(record_a)
    xb, ub = near_frame_curve(record_b)
    ia, ib = _strictly_decreasing(ua), _strictly_decreasing(ub)
    xa, ua, xb, ub = xa[ia], ua[ia], xb[ib], ub[ib]
    ua_pos, ub_pos = ua > 0.0, ub > 0.0
    xa, ua, xb, ub = xa[ua_pos], ua[ua_pos], xb[ub_pos], ub[ub_pos]
    if len(ua) < 2 or len(ub) < 2:
        return None
    lo = max(ua.min(), ub.min())
    hi = min(ua.max(), ub.max())
    if lo >= hi:
        return None
    common = (ua >= lo) & (ua <= hi)
    xi_b = np.interp(np.log(ua[common]), np.log(ub[::-1]), xb[::-1])
    gap = np.abs(xa[common] - xi_b)
    parted = gap > SEPARATION_TOL * np.maximum(1.0, np.abs(xa[common]))
    if not np.any(parted):
        return float(lo)
    return float(ua[common][parted].max())


def _monotone_profile(xi: np.ndarray, h: np.ndarray, a: float, xi_max: float) -> Profile:
    """Profile through (a, 0) keeping samples strictly increasing in both coordinates."""
    order = np.argsort(xi, kind="stable")
    out_xi, out_h = [a], [0.0]
    for x, v in zip(xi[order], h[order]):
        if not (math.isfinite(x) and math.isfinite(v)) or x > xi_max:
            continue
        if x > out_xi[-1] and v > out_h[-1]:
            out_xi.append(float(x))
            out_h.append(float(v))
    return Profile(xi=out_xi, h=out_h)


class SolverService:
    """Service for locating similarity solutions on the connection maps."""

    def __init__(
        self,
        shoot_cfg: Optional[ShootConfig] = None,
        search_cfg: Optional[SearchConfig] = None,
        workers: int = 1,
    ):
        """Initialize the solver service.

        Args:
            shoot_cfg (Optional[ShootConfig]): Shooting settings at full tolerance.
            search_cfg (Optional[SearchConfig]): Scan, bisection and matching settings.
            workers (int): Process count for independent shots; 1 runs in-process.
        """
        self.shoot_cfg = shoot_cfg or ShootConfig()
        self.search_cfg = search_cfg or SearchConfig()
        self.workers = max(1, workers)
        self.logger = get_logger(__name__)

    def _map_ordered(self, func: Callable[[Any], T], items: Sequence[Any]) -> List[T]:
        """Apply func to every item, returning results in input order.

        Pool workers hand back the shot metrics and cache entries they produced,
        which are merged into this process.

        Args:
            func (Callable[[Any], T]): Picklable function of one item.
            items (Sequence[Any]): Inputs.

        Returns:
            List[T]: Results aligned with items.
        """
        if self.workers <= 1 or len(items) < 2:
            return [func(item) for item in items]
        results: List[Optional[T]] = [None] * len(items)
        cache = get_cache_manager()
        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            future_to_index = {
                executor.submit(_pooled_call, func, item): i for i, item in enumerate(items)
            }
            for future in as_completed(future_to_index):
                result, metrics, entries = future.result()
                merge_metrics(metrics)
                cache.import_entries(entries)
                results[future_to_index[future]] = result
        return [r for r in results if r is not None]

    def _scan_cfg(self, cfg: ShootConfig) -> ShootConfig:
        return cfg.with_tolerance(max(self.search_cfg.scan_rtol, cfg.integ.rtol))

    def residual_minus(
        self, params: ModelParams, x0: float, cfg: Optional[ShootConfig] = None
    ) -> float:
        """Signed classification residual of the backward shot at x0.

        Args:
            params (ModelParams): Exponent, minus branch.
            x0 (float): Positive far-field coordinate.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            float: +u_term for HitW0, -w_term for HitU0, 0 for NearEquilibrium.

        Raises:
            NonEvaluableShotError: For Diverged and BudgetExhausted shots.
        """
        return residual_from_record(cached_shoot_minus(params, x0, cfg or self.shoot_cfg))

    def _readout_a_minus(
        self,
        params: ModelParams,
        rec_lo: ShotRecord,
        rec_hi: ShotRecord,
        cfg: ShootConfig,
    ) -> Tuple[float, str]:
        """Interface coordinate from the two limiting trajectories.

        Returns:
            Tuple[float, str]: Estimate and the readout method.
        """
        for rec in (rec_lo, rec_hi):
            if rec.termination.kind == "NearEquilibrium":
                return rec.termination.value, "equilibrium"

        landing = self.search_cfg.landing_tol
        terms = [rec_lo.termination, rec_hi.termination]
        if all(max(abs(t.u), abs(t.w)) <= landing for t in terms):
            return 0.5 * (terms[0].xi + terms[1].xi), "landing"

        dense = cfg.model_copy(
            update={"integ": cfg.integ.model_copy(update={"refine": DENSE_REFINE})}
        )
        dense_lo = cached_shoot_minus(params, rec_lo.seed, dense)
        dense_hi = cached_shoot_minus(params, rec_hi.seed, dense)
        u_sep = separation_amplitude(dense_lo, dense_hi)
        windows: List[Optional[Tuple[float, float]]] = []
        if u_sep is not None and u_sep > 0.0:
            u_cap = 0.25 * min(
                float(np.max(near_frame_curve(dense_lo)[1])),
                float(np.max(near_frame_curve(dense_hi)[1])),
            )
            lo, hi = WINDOW_FACTORS[0] * u_sep, min(WINDOW_FACTORS[1] * u_sep, u_cap)
            if hi > lo:
                windows.append((lo, hi))
        windows.append(None)

        degree = self.search_cfg.extrapolation_degree
        for window in windows:
            estimates = []
            for rec in (dense_lo, dense_hi):
                try:
                    estimates.append(extrapolate_A_minus(rec, window, degree))
                except ExtrapolationError as exc:
                    self.logger.debug(f"Extrapolation on window {window} failed: {exc.message}")
            if estimates:
                self.logger.info(
                    f"Extrapolated A_minus from window {window} (u_sep={u_sep!r}): {estimates}"
                )
                return float(np.mean(estimates)), "extrapolation"
        raise ExtrapolationError(
            "No usable extrapolation window on the limiting trajectories",
            {"x0_lo": rec_lo.seed, "x0_hi": rec_hi.seed, "u_sep": u_sep},
        )

    def refine_boundary(
        self,
        params: ModelParams,
        bracket: Tuple[float, float],
        cfg: Optional[ShootConfig] = None,
    ) -> BoundaryRoot:
        """Bisect a classification boundary and read off the interface coordinate.

        Args:
            params (ModelParams): Exponent, minus branch.
            bracket (Tuple[float, float]): (lo, hi) with opposite residual signs.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            BoundaryRoot: Boundary location, A_minus and the limiting shots.

        Raises:
            NoSignChangeError: If the residual signs at lo and hi agree.
            AmbiguousRootError: If a midpoint inside the bracket is not evaluable.
            ExtrapolationError: If A_minus cannot be extrapolated.
        """
        cfg = cfg or self.shoot_cfg
        lo, hi = float(bracket[0]), float(bracket[1])
        if not 0.0 < lo < hi:
            raise DomainError(f"Bracket must satisfy 0 < lo < hi, got {bracket}")

        def evaluate(x0: float, lo_end: float, hi_end: float) -> Tuple[float, ShotRecord]:
            record = cached_shoot_minus(params, x0, cfg)
            try:
                return residual_from_record(record), record
            except NonEvaluableShotError:
                raise AmbiguousRootError(x0, lo_end, hi_end)

        r_lo, rec_lo = evaluate(lo, lo, hi)
        r_hi, rec_hi = evaluate(hi, lo, hi)
        for r, rec in ((r_lo, rec_lo), (r_hi, rec_hi)):
            if r == 0.0:
                return BoundaryRoot(
                    x0_star=rec.seed, A_minus=rec.termination.value, method="equilibrium",
                    record_lo=rec, record_hi=rec,
                )
        if (r_lo > 0.0) == (r_hi > 0.0):
            raise NoSignChangeError(lo, hi, r_lo, r_hi)

        width = self.search_cfg.bisect_rel_width
        while hi - lo > width * hi:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            r_mid, rec_mid = evaluate(mid, lo, hi)
            if r_mid == 0.0:
                self.logger.info(f"Boundary landed on the equilibrium at x0={mid!r}")
                return BoundaryRoot(
                    x0_star=mid, A_minus=rec_mid.termination.value, method="equilibrium",
                    record_lo=rec_mid, record_hi=rec_mid,
                )
            if (r_mid > 0.0) == (r_lo > 0.0):
                lo, r_lo, rec_lo = mid, r_mid, rec_mid
            else:
                hi, r_hi, rec_hi = mid, r_mid, rec_mid

        x0_star = 0.5 * (lo + hi)
        a_minus, method = self._readout_a_minus(params, rec_lo, rec_hi, cfg)
        self.logger.info(
            f"m={params.m!r}: boundary x0*={x0_star!r}, A_minus={a_minus!r} ({method})"
        )
        return BoundaryRoot(
            x0_star=x0_star, A_minus=a_minus, method=method, record_lo=rec_lo, record_hi=rec_hi
        )

    @timing_decorator("solver.find_x0_star")
    def find_x0_star(
        self,
        params: ModelParams,
        bracket: Tuple[float, float],
        cfg: Optional[ShootConfig] = None,
    ) -> Tuple[float, float]:
        """Locate x0* inside a bracket and its interface coordinate A_minus.

        Args:
            params (ModelParams): Exponent, minus branch.
            bracket (Tuple[float, float]): (lo, hi) with opposite residual signs.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            Tuple[float, float]: (x0_star, A_minus).
        """
        root = self.refine_boundary(params, bracket, cfg)
        return root.x0_star, root.A_minus

    @timing_decorator("solver.trace_map_minus")
    def trace_map_minus(
        self,
        params: ModelParams,
        x0_grid: Sequence[float],
        cfg: Optional[ShootConfig] = None,
    ) -> List[ConnectionMapSample]:
        """Sample the backward connection map over a strictly increasing grid.

        Args:
            params (ModelParams): Exponent, minus branch.
            x0_grid (Sequence[float]): Positive, strictly increasing x0 values.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            List[ConnectionMapSample]: One sample per grid point, gaps included.

        Raises:
            DomainError: If the grid is not positive and strictly increasing.
        """
        grid = [float(x) for x in x0_grid]
        if any(x <= 0.0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("x0 grid must be positive and strictly increasing")
        func = functools.partial(minus_map_sample, params, cfg or self.shoot_cfg)
        samples = self._map_ordered(func, grid)
        gaps = sum(1 for s in samples if sample_residual(s) is None)
        if gaps:
            self.logger.warning(f"{gaps} of {len(samples)} map points are not evaluable")
        return samples

    @timing_decorator("solver.trace_map_plus")
    def trace_map_plus(
        self,
        params: ModelParams,
        a_grid: Sequence[float],
        cfg: Optional[ShootConfig] = None,
    ) -> List[ConnectionMapSample]:
        """Sample the forward map A+ -> x0 over a strictly increasing grid.

        Args:
            params (ModelParams): Exponent, plus branch.
            a_grid (Sequence[float]): Nonzero, strictly increasing A+ values.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            List[ConnectionMapSample]: One sample per grid point, gaps included.
        """
        grid = [float(a) for a in a_grid]
        if any(a == 0.0 for a in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("A+ grid must be nonzero and strictly increasing")
        func = functools.partial(plus_map_sample, params, cfg or self.shoot_cfg)
        return self._map_ordered(func, grid)

    def _x0_of(self, params: ModelParams, a_plus: float, cfg: ShootConfig) -> float:
        return cached_shoot_plus(params, a_plus, cfg)[0]

    def auto_bracket(
        self, params: ModelParams, x0_target: float, cfg: Optional[ShootConfig] = None
    ) -> Tuple[float, float]:
        """Bracket A+ for a target x0 by geometric growth on the matching side of x_Q.

        Args:
            params (ModelParams): Exponent, plus branch.
            x0_target (float): Target far-field coordinate.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            Tuple[float, float]: (A_lo, A_hi) straddling the target.

        Raises:
            NoStraddleError: If doubling does not reach the target.
        """
        cfg = cfg or self.shoot_cfg
        if x0_target > params.x_q:
            lo, hi = A_PLUS_INNER, 1.0
            for _ in range(BRACKET_DOUBLINGS):
                if self._x0_of(params, hi, cfg) >= x0_target:
                    return lo, hi
                lo, hi = hi, 2.0 * hi
        else:
            lo, hi = -1.0, -A_PLUS_INNER
            for _ in range(BRACKET_DOUBLINGS):
                if self._x0_of(params, lo, cfg) <= x0_target:
                    return lo, hi
                lo, hi = 2.0 * lo, lo
        raise NoStraddleError(x0_target, (lo, hi), ("unbounded", "unbounded"))

    @timing_decorator("solver.match_plus")
    def match_plus(
        self,
        params: ModelParams,
        x0_target: float,
        bracket: Optional[Tuple[float, float]] = None,
        cfg: Optional[ShootConfig] = None,
    ) -> float:
        """Find A+ whose forward shot reads off x0_target.

        The forward map is increasing, so the bracket is kept and narrowed by
        Illinois-modified secant steps, with bisection whenever the secant point leaves
        the bracket or the bracket stops shrinking.

        Args:
            params (ModelParams): Exponent, plus branch.
            x0_target (float): Target far-field coordinate.
            bracket (Optional[Tuple[float, float]]): (A_lo, A_hi); chosen automatically
                when None.
            cfg (Optional[ShootConfig]): Shooting settings.

        Returns:
            float: Matched A+.

        Raises:
            SignConsistencyError: If the bracket lies on the wrong side of zero.
            NoStraddleError: If the bracket ends do not straddle the target.
            MatchNotConvergedError: If no A+ within match_tol is found, for instance
                when the bracket closes on a jump of the forward map.
        """
        cfg = cfg or self.shoot_cfg
        if bracket is None:
            bracket = self.auto_bracket(params, x0_target, cfg)
        a, b = sorted((float(bracket[0]), float(bracket[1])))
        xq = params.x_q
        if (x0_target > xq and a < 0.0) or (x0_target < xq and b > 0.0):
            raise SignConsistencyError(x0_target, xq, (a, b))

        tol = self.search_cfg.match_tol
        fa = self._x0_of(params, a, cfg) - x0_target
        fb = self._x0_of(params, b, cfg) - x0_target
        if abs(fa) <= tol:
            return a
        if abs(fb) <= tol:
            return b
        if (fa > 0.0) == (fb > 0.0):
            raise NoStraddleError(x0_target, (a, b), (fa + x0_target, fb + x0_target))

        side = 0
        best_c, best_f = (a, fa) if abs(fa) < abs(fb) else (b, fb)
        for iteration in range(self.search_cfg.match_max_iter):
            width = b - a
            c = b - fb * (b - a) / (fb - fa)
            if not a < c < b or c == 0.0:
                c = 0.5 * (a + b)
            fc = self._x0_of(params, c, cfg) - x0_target
            if abs(fc) < abs(best_f):
                best_c, best_f = c, fc
            if abs(fc) <= tol:
                self.logger.info(
                    f"m={params.m!r}: matched A+={c!r} to x0={x0_target!r} "
                    f"in {iteration + 1} iterations"
                )
                return c
            if (fc > 0.0) == (fb > 0.0):
                b, fb = c, fc
                if side == -1:
                    fa *= 0.5
                side = -1
            else:
                a, fa = c, fc
                if side == 1:
                    fb *= 0.5
                side = 1
            if b - a > 0.5 * width and iteration % 3 == 2:
                mid = 0.5 * (a + b)
                fm = self._x0_of(params, mid, cfg) - x0_target
                if (fm > 0.0) == (fb > 0.0):
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
                side = 0
            if b - a <= 4.0 * np.finfo(float).eps * max(abs(a), abs(b)):
                break
        raise MatchNotConvergedError(x0_target, best_c, abs(best_f), (a, b))

    def scan_grid(
        self, params: ModelParams, points_per_decade: Optional[int] = None
    ) -> List[float]:
        """Log-spaced x0 scan with extra points clustered around x_Q.

        Args:
            params (ModelParams): Exponent.
            points_per_decade (Optional[int]): Density override.

        Returns:
            List[float]: Sorted, unique grid.
        """
        search = self.search_cfg
        ppd = points_per_decade or search.points_per_decade
        decades = math.log10(search.x0_max / search.x0_min)
        count = max(2, int(math.ceil(ppd * decades)) + 1)
        points = set(np.geomspace(search.x0_min, search.x0_max, count).tolist())
        if search.cluster_x_q:
            xq = params.x_q
            for k in range(4, 25):
                for side in (-1.0, 1.0):
                    extra = xq * (1.0 + side * 10.0 ** (-k / 4.0))
                    if search.x0_min <= extra <= search.x0_max:
                        points.add(extra)
        return sorted(points)

    def find_boundaries(
        self,
        params: ModelParams,
        grid: Sequence[float],
        cfg: Optional[ShootConfig] = None,
        skipped: Optional[List[SkippedBracket]] = None,
    ) -> List[BoundaryRoot]:
        """Detect sign changes on a grid and refine every non-stationary boundary.

        Args:
            params (ModelParams): Exponent, minus branch.
            grid (Sequence[float]): Increasing x0 grid.
            cfg (Optional[ShootConfig]): Full-tolerance shooting settings.
            skipped (Optional[List[SkippedBracket]]): Collects brackets that failed.

        Returns:
            List[BoundaryRoot]: Refined boundaries in increasing x0.
        """
        cfg = cfg or self.shoot_cfg
        samples = self.trace_map_minus(params, grid, self._scan_cfg(cfg))
        brackets: List[Tuple[float, float]] = []
        roots: List[BoundaryRoot] = []
        previous: Optional[Tuple[float, float]] = None
        for sample in samples:
            r = sample_residual(sample)
            if r is None:
                previous = None
                continue
            if r == 0.0:
                roots.append(
                    BoundaryRoot(
                        x0_star=sample.sweep_var, A_minus=sample.val_term, method="equilibrium"
                    )
                )
                previous = None
                continue
            if previous is not None and (previous[1] > 0.0) != (r > 0.0):
                brackets.append((previous[0], sample.sweep_var))
            previous = (sample.sweep_var, r)

        for lo, hi in brackets:
            for sub in self._split_stationary(params, lo, hi, cfg, skipped):
                try:
                    roots.append(self.refine_boundary(params, sub, cfg))
                except SolverException as exc:
                    self.logger.warning(f"Skipping bracket {sub}: {exc.message}")
                    if skipped is not None:
                        skipped.append(
                            SkippedBracket(
                                lo=sub[0], hi=sub[1], stage="refine", code=exc.code,
                                message=exc.message,
                            )
                        )
        xq = params.x_q
        tol = self.search_cfg.stationary_tol
        roots = [r for r in roots if abs(r.x0_star - xq) > tol * xq]
        return sorted(roots, key=lambda r: r.x0_star)

    def _split_stationary(
        self,
        params: ModelParams,
        lo: float,
        hi: float,
        cfg: ShootConfig,
        skipped: Optional[List[SkippedBracket]] = None,
    ) -> List[Tuple[float, float]]:
        """Remove the exact x_Q boundary from a bracket, keeping any neighbours."""
        xq = params.x_q
        tol = self.search_cfg.stationary_tol
        if not lo <= xq <= hi:
            return [(lo, hi)]
        below, above = xq * (1.0 - tol), xq * (1.0 + tol)
        pieces = []
        try:
            ends = [self.residual_minus(params, x, cfg) for x in (lo, below, above, hi)]
        except NonEvaluableShotError as exc:
            self.logger.warning(f"Could not split bracket ({lo}, {hi}) at x_Q: {exc.message}")
            if skipped is not None:
                skipped.append(
                    SkippedBracket(
                        lo=lo, hi=hi, stage="split", code=exc.code, message=exc.message
                    )
                )
            return []
        if lo < below and (ends[0] > 0.0) != (ends[1] > 0.0) and ends[0] * ends[1] != 0.0:
            pieces.append((lo, below))
        if above < hi and (ends[2] > 0.0) != (ends[3] > 0.0) and ends[2] * ends[3] != 0.0:
            pieces.append((above, hi))
        return pieces

    def _minus_profile(self, root: BoundaryRoot) -> Profile:
        record = root.record_lo or root.record_hi
        if record is None:
            return Profile(xi=[root.A_minus], h=[0.0])
        xi, u = record.xi_u_curve()
        if root.method == "extrapolation" and root.record_hi is not None:
            u_sep = separation_amplitude(record, root.record_hi) or 0.0
            keep = u > WINDOW_FACTORS[0] * u_sep
            xi, u = xi[keep], u[keep]
        keep = xi > root.A_minus
        return _monotone_profile(xi[keep], u[keep], root.A_minus, self.search_cfg.profile_xi_max)

    def _plus_profile(self, record: ShotRecord, a_plus: float) -> Profile:
        xi, u = record.xi_u_curve()
        keep = xi > a_plus
        return _monotone_profile(xi[keep], u[keep], a_plus, self.search_cfg.profile_xi_max)

    def stationary_solution(
        self, m: float, xi_max: float = 1e4, n: int = 400
    ) -> SimilaritySolution:
        """Closed-form A = 0 solution with x0 = x_Q on both sides.

        Args:
            m (float): Diffusion exponent.
            xi_max (float): Largest profile coordinate.
            n (int): Profile samples.

        Returns:
            SimilaritySolution: Stationary solution.
        """
        xi = np.concatenate([[0.0], np.geomspace(1e-8, xi_max, n)])
        h = np.asarray(exact_stationary_profile(m, xi))
        profile = Profile(xi=xi.tolist(), h=h.tolist())
        return SimilaritySolution(
            m=m, A_minus=0.0, A_plus=0.0, x0_star=math.sqrt(2.0 / (m + 1.0)),
            kind="Stationary", x0_check=math.sqrt(2.0 / (m + 1.0)),
            profile_minus=profile, profile_plus=profile,
        )

    def solve_pair(self, m: float) -> List[SimilaritySolution]:
        """Find every matched similarity solution for m within the scan range.

        Args:
            m (float): Diffusion exponent above 1.

        Returns:
            List[SimilaritySolution]: Solutions in increasing x0*, mixed-sign pairs
                flagged as rejected.

        Raises:
            UnresolvedBoundaryError: If sign changes were found but none gave a solution.
        """
        return self.solve_report(m).solutions

    @timing_decorator("solver.solve_pair")
    def solve_report(self, m: float) -> SolveReport:
        """solve_pair plus the brackets that were detected but produced no solution.

        Args:
            m (float): Diffusion exponent above 1.

        Returns:
            SolveReport: Solutions and skipped brackets.

        Raises:
            UnresolvedBoundaryError: If sign changes were found but none gave a solution.
        """
        minus = ModelParams(m=m, branch="minus")
        plus = ModelParams(m=m, branch="plus")
        grid = self.scan_grid(minus)
        self.logger.info(f"m={m!r}: scanning {len(grid)} x0 values")
        skipped: List[SkippedBracket] = []
        roots = self.find_boundaries(minus, grid, skipped=skipped)
        solutions: List[SimilaritySolution] = []
        if self.search_cfg.include_stationary:
            solutions.append(self.stationary_solution(m))

        for root in roots:
            try:
                a_plus = self.match_plus(plus, root.x0_star)
                x0_check, plus_record = cached_shoot_plus(plus, a_plus, self.shoot_cfg)
            except SolverException as exc:
                self.logger.warning(f"m={m!r}: no match for x0*={root.x0_star!r}: {exc.message}")
                skipped.append(
                    SkippedBracket(
                        lo=root.x0_star, hi=root.x0_star, stage="match", code=exc.code,
                        message=exc.message,
                    )
                )
                continue
            if root.A_minus > 0.0 and a_plus > 0.0:
                kind = "Reversing"
            elif root.A_minus < 0.0 and a_plus < 0.0:
                kind = "AntiReversing"
            else:
                kind = "Mixed"
            rejected = kind == "Mixed" or (root.A_minus > 0.0) != (root.x0_star > plus.x_q)
            if rejected:
                self.logger.info(
                    f"m={m!r}: rejecting mixed-sign pair A-={root.A_minus!r}, A+={a_plus!r}"
                )
            solutions.append(
                SimilaritySolution(
                    m=m,
                    A_minus=root.A_minus,
                    A_plus=a_plus,
                    x0_star=root.x0_star,
                    kind=kind,
                    rejected=rejected,
                    x0_check=x0_check,
                    a_minus_method=root.method,
                    profile_minus=self._minus_profile(root),
                    profile_plus=self._plus_profile(plus_record, a_plus),
                )
            )
        self.logger.info(
            f"m={m!r}: {sum(not s.rejected for s in solutions)} accepted solution(s), "
            f"{sum(s.rejected for s in solutions)} rejected, {len(skipped)} bracket(s) skipped"
        )
        if skipped and not any(s.kind != "Stationary" for s in solutions):
            raise UnresolvedBoundaryError(m, [s.model_dump() for s in skipped])
        return SolveReport(m=m, solutions=solutions, skipped=skipped)

    @timing_decorator("solver.sweep_branches")
    def sweep_branches(self, sweep: SweepConfig) -> List[BranchPoint]:
        """Follow classification boundaries through m.

        Each m gets a fresh coarse scan plus points around the previous roots; roots
        are attached to the nearest active branch of the same A_minus sign.

        Args:
            sweep (SweepConfig): m range, step and scan density.

        Returns:
            List[BranchPoint]: Points in sweep order, births and breaks flagged.
        """
        points: List[BranchPoint] = []
        active: Dict[str, BranchPoint] = {}
        counters = {"pos": 0, "neg": 0}
        window = sweep.continuation_window

        for m in sweep.m_values():
            params = ModelParams(m=m, branch="minus")
            grid = set(self.scan_grid(params, sweep.points_per_decade))
            for point in active.values():
                if point.branch_label != "xq":
                    for k in range(-4, 5):
                        extra = point.x0_star * (1.0 + k * window / 4.0)
                        if extra > 0.0:
                            grid.add(extra)
            roots = self.find_boundaries(params, sorted(grid))

            matched: Dict[str, BranchPoint] = {}
            xq_point = BranchPoint(m=m, x0_star=params.x_q, A_minus=0.0, branch_label="xq")
            matched["xq"] = xq_point.model_copy(
                update={"event": "continued" if "xq" in active else "birth"}
            )
            for root in roots:
                prefix = "pos" if root.A_minus > 0.0 else "neg"
                candidates = [
                    (abs(p.x0_star - root.x0_star) / p.x0_star, label)
                    for label, p in active.items()
                    if label.startswith(prefix) and label not in matched
                ]
                candidates = [c for c in candidates if c[0] <= 2.0 * window]
                if candidates:
                    label = min(candidates)[1]
                    event = "continued"
                else:
                    label = f"{prefix}-{counters[prefix]}"
                    counters[prefix] += 1
                    event = "birth"
                matched[label] = BranchPoint(
                    m=m, x0_star=root.x0_star, A_minus=root.A_minus, branch_label=label,
                    event=event,
                )

            for label, point in active.items():
                if label not in matched:
                    self.logger.warning(f"Branch {label} lost at m={m!r}")
                    points.append(point.model_copy(update={"m": m, "event": "break"}))
            points.extend(sorted(matched.values(), key=lambda p: p.x0_star))
            active = matched
            self.logger.info(f"m={m!r}: {len(matched)} branch point(s)")
        return points
