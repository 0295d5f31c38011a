"""Unit tests for the command-line surface."""

import json
from unittest.mock import patch

import pytest

from src.cli import build_parser, build_run_config, cli_dispatch
from src.model.domain import SkippedBracket, SolveReport
from src.model.exceptions import UnresolvedBoundaryError
from src.services.solver_service import SolverService


def parse_config(argv):
    return build_run_config(build_parser().parse_args(argv))


class TestBuildRunConfig:
    """Tests for merging flags and config files."""

    def test_flat_flags_are_nested(self):
        config = parse_config(
            ["shoot-minus", "--m", "3", "--x0", "0.8", "--delta", "0.002", "--rtol", "1e-9"]
        )
        assert config.command == "shoot-minus"
        assert config.shoot.delta == 0.002
        assert config.shoot.integ.rtol == 1e-9
        assert config.shoot.integ.atol == 1e-10

    def test_points_per_decade_goes_to_search(self):
        config = parse_config(["solve", "--m", "3", "--points-per-decade", "50"])
        assert config.search.points_per_decade == 50
        assert "points_per_decade" in config.search.model_fields_set

    def test_flags_override_config_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"m": 4.0, "x0": 1.0, "switch-xi": 40.0}))
        config = parse_config(["shoot-minus", "--config", str(path), "--x0", "1.2"])
        assert config.m == 4.0
        assert config.x0 == 1.2
        assert config.shoot.switch_xi == 40.0

    def test_nested_file_sections(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"m": 3.0, "shoot": {"eps": 1e-7, "integ": {"atol": 1e-11}}}))
        config = parse_config(["solve", "--config", str(path), "--atol", "1e-12"])
        assert config.shoot.eps == 1e-7
        assert config.shoot.integ.atol == 1e-12


class TestExitCodes:
    """Tests for the 0/1/2 exit code contract."""

    def test_verify_exact(self, capsys):
        assert cli_dispatch(["verify-exact", "--m", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["m"] == 3.0
        assert payload["max_residual"] < 1e-8
        assert set(payload["residuals"]) == {
            "near_plus",
            "near_minus",
            "far_plus",
            "far_minus",
            "energy_plus",
        }

    def test_unknown_flag(self, capsys):
        assert cli_dispatch(["verify-exact", "--m", "3", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_command(self):
        assert cli_dispatch([]) == 2

    def test_missing_required_parameter(self, capsys):
        assert cli_dispatch(["shoot-minus", "--m", "3"]) == 2
        assert "--x0" in capsys.readouterr().err

    def test_m_not_above_one(self):
        assert cli_dispatch(["verify-exact", "--m", "1.0"]) == 2

    def test_non_finite_parameter(self):
        assert cli_dispatch(["shoot-minus", "--m", "3", "--x0", "nan"]) == 2

    def test_reconstruct_rejects_t_zero(self):
        assert cli_dispatch(["reconstruct", "--m", "3", "--times", "-1", "0"]) == 2

    def test_plus_map_needs_bracket(self):
        assert cli_dispatch(["trace-map", "--m", "3", "--branch", "plus"]) == 2

    def test_solver_error(self, capsys):
        """Test that a solver failure exits with 1 and a JSON error on stderr."""
        code = cli_dispatch(["match", "--m", "3", "--x0", "0.9", "--bracket", "-0.5", "-0.1"])
        assert code == 1
        err = capsys.readouterr().err
        line = [s for s in err.splitlines() if s.startswith("{")][-1]
        assert json.loads(line)["error"]["code"] == "SIGN_INCONSISTENT"

    def test_version(self, capsys):
        assert cli_dispatch(["--version"]) == 0
        assert "reversing-interfaces" in capsys.readouterr().out


class TestOutputs:
    """Tests for written results and manifests."""

    def test_json_output_with_manifest(self, tmp_path):
        out = tmp_path / "exact.json"
        assert cli_dispatch(["verify-exact", "--m", "2", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["m"] == 2.0
        manifest = json.loads((tmp_path / "exact.json.manifest.json").read_text())
        assert manifest["command"] == "verify-exact"
        assert manifest["outputs"] == [str(out)]
        assert manifest["config"]["m"] == 2.0
        assert len(manifest["input_hash"]) == 64
        assert manifest["wall_time_s"] >= 0.0

    def test_csv_output_is_deterministic(self, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (first, second):
            argv = ["verify-exact", "--m", "2", "--format", "csv", "--out", str(path)]
            assert cli_dispatch(argv) == 0
        data = first.read_bytes()
        assert data == second.read_bytes()
        assert data.startswith(b"check,residual\n")
        assert b"\r\n" not in data

    def test_input_hash_ignores_output_path(self, tmp_path):
        hashes = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert cli_dispatch(["verify-exact", "--m", "2", "--out", str(out)]) == 0
            manifest = json.loads((tmp_path / f"{name}.manifest.json").read_text())
            hashes.append(manifest["input_hash"])
        assert hashes[0] == hashes[1]

    def test_shoot_minus_trajectory_csv(self, tmp_path):
        out = tmp_path / "shot.csv"
        argv = ["shoot-minus", "--m", "3", "--x0", "1.0", "--format", "csv", "--out", str(out)]
        assert cli_dispatch(argv) == 0
        header = out.read_text().splitlines()[0]
        assert header == "clock,frame,xi,u,w,x,y,z"
        manifest = json.loads((tmp_path / "shot.csv.manifest.json").read_text())
        assert manifest["shot_stats"]["shot.steps_accepted"]["count"] >= 1

    def test_trace_map_minus(self, capsys):
        argv = ["trace-map", "--m", "3", "--grid", "3", "--bracket", "0.5", "1.5"]
        assert cli_dispatch(argv) == 0
        payload = json.loads(capsys.readouterr().out)
        grid = [s["sweep_var"] for s in payload["samples"]]
        assert grid == pytest.approx([0.5, 0.866, 1.5], rel=1e-3)

    def test_shoot_plus_reports_uz_trace(self, capsys):
        assert cli_dispatch(["shoot-plus", "--m", "3", "--a-plus", "0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["termination"]["kind"] == "ForwardReadout"
        trace = payload["uz_trace"]
        assert len(trace["xi"]) == len(trace["uz"]) > 0
        assert all(v > 0.0 for v in trace["uz"])

    def test_shoot_minus_has_no_uz_trace(self, capsys):
        assert cli_dispatch(["shoot-minus", "--m", "3", "--x0", "1.0"]) == 0
        assert "uz_trace" not in json.loads(capsys.readouterr().out)


class TestSolveCommand:
    """Tests for the solve payload with mocked solver runs."""

    def test_skipped_brackets_are_reported(self, capsys):
        report = SolveReport(
            m=3.0,
            solutions=[SolverService().stationary_solution(3.0, n=10)],
            skipped=[
                SkippedBracket(
                    lo=1.0, hi=1.1, stage="refine", code="AMBIGUOUS_ROOT", message="failed"
                )
            ],
        )
        with patch.object(SolverService, "solve_report", return_value=report):
            assert cli_dispatch(["solve", "--m", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["skipped"] == [
            {"lo": 1.0, "hi": 1.1, "stage": "refine", "code": "AMBIGUOUS_ROOT", "message": "failed"}
        ]
        assert [s["kind"] for s in payload["solutions"]] == ["Stationary"]

    def test_unresolved_boundaries_exit_one(self, capsys):
        error = UnresolvedBoundaryError(3.0, [{"lo": 1.0, "hi": 1.1}])
        with patch.object(SolverService, "solve_report", side_effect=error):
            assert cli_dispatch(["solve", "--m", "3"]) == 1
        err = capsys.readouterr().err
        line = [s for s in err.splitlines() if s.startswith("{")][-1]
        assert json.loads(line)["error"]["code"] == "UNRESOLVED_BOUNDARIES"
