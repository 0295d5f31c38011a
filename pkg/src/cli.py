"""Command-line entry point for reversing-interfaces."""

import argparse
import json
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.dynamics.exact import exact_solution_residuals
from src.model.config_schema_model import (
    IntegrationConfig,
    RunConfig,
    SearchConfig,
    ShootConfig,
    SweepConfig,
    validate_run_config,
)
from src.model.domain import ModelParams, RunManifest, ShotRecord
from src.model.exceptions import SolverException, UsageError
from src.services.export_service import (
    ExportService,
    branches_table,
    frames_table,
    map_table,
    solutions_table,
    trajectory_table,
)
from src.services.reconstruction_service import ReconstructionService
from src.services.solver_service import SolverService, cached_shoot_minus, cached_shoot_plus
from src.utils.json_utils import input_hash
from src.utils.logger import RunContext, get_logger, setup_logging_from_env
from src.utils.performance import PerformanceMetrics, clear_metrics, summarize_metrics

logger = get_logger(__name__)

COMMANDS = (
    "shoot-minus",
    "shoot-plus",
    "find",
    "match",
    "trace-map",
    "sweep",
    "solve",
    "reconstruct",
    "verify-exact",
)
SHOOT_KEYS = ("delta", "eps", "switch_xi", "tau_inf")
INTEG_KEYS = ("rtol", "atol")
SEARCH_KEYS = ("points_per_decade",)
DEFAULT_MAP_POINTS = 200
DEFAULT_FRAME_POINTS = 400
DEFAULT_X_RANGE = (1e-6, 2.0)

Result = Tuple[Dict[str, Any], Optional[pd.DataFrame]]


def tool_version() -> str:
    try:
        return version("reversing-interfaces")
    except PackageNotFoundError:
        return "0.1.0"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so the exit code stays ours."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per operation.

    Returns:
        argparse.ArgumentParser: Parser.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON config mirroring the flags")
    common.add_argument("--m", type=float, help="Diffusion exponent m > 1")
    common.add_argument("--branch", choices=["plus", "minus"])
    common.add_argument("--x0", type=float, help="Far-field coordinate (or match target)")
    common.add_argument("--a-plus", type=float, help="Interface coordinate for t > 0")
    common.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--grid", type=int, metavar="N", help="Sample count")
    common.add_argument("--delta", type=float, help="Far-field seed offset")
    common.add_argument("--eps", type=float, help="Near-field seed offset")
    common.add_argument("--switch-xi", type=float, help="Frame-switch threshold")
    common.add_argument("--tau-inf", type=float, help="Forward-shot clock horizon")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--points-per-decade", type=int)
    common.add_argument("--m-range", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--m-step", type=float)
    common.add_argument("--times", type=float, nargs="+", metavar="T")
    common.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--solution-index", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--threads", type=int, metavar="N")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = _Parser(
        prog="reversing-interfaces",
        description="Self-similar reversing and anti-reversing interfaces (m > 1, n = 0).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "shoot-minus": "Backward shot from the far-field seed at --x0.",
        "shoot-plus": "Forward shot from the near-field seed at --a-plus.",
        "find": "Locate x0* and A- inside --bracket.",
        "match": "Find A+ whose forward shot reads off --x0.",
        "trace-map": "Sample a connection map over --grid points.",
        "sweep": "Follow classification boundaries through --m-range.",
        "solve": "All matched solutions for --m.",
        "reconstruct": "Rebuild h(x, t) at --times for a solution of --m.",
        "verify-exact": "Residuals of the closed-form solutions.",
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])
    return parser


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"Cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"Config file {path} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional config file with explicit flags into a RunConfig.

    Flat shooting keys (delta, rtol, ...) go to the nested shoot config; explicit flags
    override file values.

    Args:
        args (argparse.Namespace): Parsed arguments.

    Returns:
        RunConfig: Validated configuration.

    Raises:
        ValidationError: If the merged configuration is invalid.
    """
    merged: Dict[str, Any] = _load_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in ("config", "log_level") or value is None:
            continue
        merged[key] = list(value) if isinstance(value, list) else value
    merged["command"] = args.command

    shoot = dict(merged.pop("shoot", {}) or {})
    integ = dict(shoot.pop("integ", {}) or {})
    search = dict(merged.pop("search", {}) or {})
    for key in SHOOT_KEYS:
        if key in merged:
            shoot[key] = merged.pop(key)
    for key in INTEG_KEYS:
        if key in merged:
            integ[key] = merged.pop(key)
    for key in SEARCH_KEYS:
        if key in merged:
            search[key] = merged.pop(key)
    merged.pop("log_level", None)
    shoot["integ"] = IntegrationConfig(**integ)
    merged["shoot"] = ShootConfig(**shoot)
    merged["search"] = SearchConfig(**search)
    return validate_run_config(merged)


def _shot_payload(record: ShotRecord) -> Dict[str, Any]:
    table = trajectory_table(record)
    payload: Dict[str, Any] = {
        "m": record.params.m,
        "branch": record.params.branch,
        "seed": record.seed,
        "seed_kind": record.seed_kind,
        "termination": record.termination.model_dump(),
        "x0_estimate": record.x0_estimate,
        "x0_raw": record.x0_raw,
        "stats": record.stats.model_dump(),
        "trajectory": {col: table[col].tolist() for col in table.columns},
    }
    if record.seed_kind == "a_plus":
        uz = record.uz_trace()
        payload["uz_trace"] = {"xi": uz[:, 0].tolist(), "uz": uz[:, 1].tolist()}
    return payload


def _cmd_shoot_minus(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None and config.x0 is not None
    record = cached_shoot_minus(ModelParams(m=config.m, branch="minus"), config.x0, config.shoot)
    return _shot_payload(record), trajectory_table(record)


def _cmd_shoot_plus(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None and config.a_plus is not None
    params = ModelParams(m=config.m, branch="plus")
    _, record = cached_shoot_plus(params, config.a_plus, config.shoot)
    return _shot_payload(record), trajectory_table(record)


def _cmd_find(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None and config.bracket is not None
    root = solver.refine_boundary(ModelParams(m=config.m, branch="minus"), config.bracket)
    payload = {
        "m": config.m,
        "bracket": list(config.bracket),
        "x0_star": root.x0_star,
        "A_minus": root.A_minus,
        "a_minus_method": root.method,
    }
    table = pd.DataFrame([{k: v for k, v in payload.items() if k != "bracket"}])
    return payload, table


def _cmd_match(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None and config.x0 is not None
    params = ModelParams(m=config.m, branch="plus")
    a_plus = solver.match_plus(params, config.x0, config.bracket)
    x0_check, _ = cached_shoot_plus(params, a_plus, config.shoot)
    payload = {"m": config.m, "x0_target": config.x0, "A_plus": a_plus, "x0_check": x0_check}
    return payload, pd.DataFrame([payload])


def _cmd_trace_map(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None
    branch = config.branch or "minus"
    params = ModelParams(m=config.m, branch=branch)
    n = config.grid or DEFAULT_MAP_POINTS
    if branch == "minus":
        lo, hi = config.bracket or (config.search.x0_min, config.search.x0_max)
        if not 0.0 < lo < hi:
            raise UsageError("trace-map on the minus branch needs 0 < LO < HI")
        samples = solver.trace_map_minus(params, np.geomspace(lo, hi, n).tolist())
    else:
        if config.bracket is None:
            raise UsageError("trace-map on the plus branch requires --bracket LO HI in A+")
        grid = [a for a in np.linspace(*config.bracket, n).tolist() if a != 0.0]
        samples = solver.trace_map_plus(params, grid)
    payload = {"m": config.m, "branch": branch, "samples": [s.model_dump() for s in samples]}
    return payload, map_table(samples)


def _cmd_sweep(config: RunConfig, solver: SolverService) -> Result:
    assert config.m_range is not None
    sweep_density: Dict[str, Any] = {}
    if "points_per_decade" in config.search.model_fields_set:
        sweep_density["points_per_decade"] = config.search.points_per_decade
    sweep = SweepConfig(
        m_lo=config.m_range[0],
        m_hi=config.m_range[1],
        m_step=config.m_step,
        **sweep_density,
    )
    points = solver.sweep_branches(sweep)
    payload = {"sweep": sweep.model_dump(), "points": [p.model_dump() for p in points]}
    return payload, branches_table(points)


def _cmd_solve(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None
    report = solver.solve_report(config.m)
    payload = {
        "m": config.m,
        "solutions": [s.model_dump() for s in report.solutions],
        "skipped": [s.model_dump() for s in report.skipped],
    }
    return payload, solutions_table(report.solutions)


def _cmd_reconstruct(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None
    accepted = [s for s in solver.solve_pair(config.m) if not s.rejected]
    if config.solution_index >= len(accepted):
        raise UsageError(
            f"--solution-index {config.solution_index} out of range; "
            f"{len(accepted)} accepted solution(s) for m={config.m}"
        )
    solution = accepted[config.solution_index]
    lo, hi = config.x_range or DEFAULT_X_RANGE
    x_grid = np.linspace(lo, hi, config.grid or DEFAULT_FRAME_POINTS)
    service = ReconstructionService()
    frames = service.reconstruct_h(solution, config.times, x_grid)

    waveforms = []
    for frame in frames:
        direction = service.interface_direction(solution, frame.t)
        try:
            report = service.verify_local_waveforms(frame, config.m, direction)
            waveforms.append(report.model_dump())
        except SolverException as exc:
            logger.warning(f"Waveform check skipped at t={frame.t!r}: {exc.message}")
    payload = {
        "solution": solution.summary(),
        "frames": [f.model_dump() for f in frames],
        "waveforms": waveforms,
        "interface_exponent": service.interface_exponent(frames),
    }
    return payload, frames_table(frames)


def _cmd_verify_exact(config: RunConfig, solver: SolverService) -> Result:
    assert config.m is not None
    residuals = exact_solution_residuals(config.m, config.grid or 64)
    payload = {"m": config.m, "residuals": residuals, "max_residual": max(residuals.values())}
    return payload, pd.DataFrame([{"check": k, "residual": v} for k, v in residuals.items()])


HANDLERS: Dict[str, Callable[[RunConfig, SolverService], Result]] = {
    "shoot-minus": _cmd_shoot_minus,
    "shoot-plus": _cmd_shoot_plus,
    "find": _cmd_find,
    "match": _cmd_match,
    "trace-map": _cmd_trace_map,
    "sweep": _cmd_sweep,
    "solve": _cmd_solve,
    "reconstruct": _cmd_reconstruct,
    "verify-exact": _cmd_verify_exact,
}


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and write its outputs.

    Args:
        argv (Optional[Sequence[str]]): Arguments without the program name.

    Returns:
        int: 0 on success, 1 on solver errors, 2 on usage errors.
    """
    argv_list: List[str] = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv_list)
    except UsageError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logging_from_env(args.log_level)
    try:
        config = build_run_config(args)
    except ValidationError as exc:
        print(f"error: invalid configuration\n{exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code

    resolved = config.model_dump(mode="json")
    digest = input_hash(config.model_dump(mode="json", exclude={"out", "threads"}))
    clear_metrics()
    with RunContext(digest[:12], config.command):
        logger.info(f"Running {config.command} (input hash {digest[:12]})")
        solver = SolverService(config.shoot, config.search, workers=config.threads)
        exporter = ExportService(config.format)
        try:
            with PerformanceMetrics(f"cli.{config.command}") as timer:
                payload, table = HANDLERS[config.command](config, solver)
            outputs = exporter.write(payload, table, config.out)
            if config.out is not None:
                manifest = RunManifest(
                    tool_version=tool_version(),
                    command=config.command,
                    command_line=argv_list,
                    config=resolved,
                    input_hash=digest,
                    wall_time_s=timer.elapsed,
                    shot_stats=summarize_metrics(),
                    outputs=outputs,
                )
                exporter.write_manifest(manifest, config.out)
        except SolverException as exc:
            logger.error(f"{exc.code}: {exc.message}")
            error = json.dumps({"error": exc.to_dict()}, sort_keys=True, default=str)
            print(error, file=sys.stderr)
            return exc.exit_code
    return 0


def main() -> None:
    started = time.perf_counter()
    code = cli_dispatch()
    logger.debug(f"Exited with {code} after {time.perf_counter() - started:.2f}s")
    sys.exit(code)


if __name__ == "__main__":
    main()
