"""Command line interface: exit codes, JSON output, report files."""

import csv
import json

import numpy as np
import pytest

from weberloc.cli import main


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps({
        "vertices": [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8660254037844386]],
        "weights": [1.0, 1.0, 1.0],
    }))
    return str(path)


@pytest.fixture
def region_file(tmp_path):
    path = tmp_path / "region.json"
    path.write_text(json.dumps({
        "dimension": 2,
        "constraints": [{"type": "halfspace", "normal": [0.0, 1.0], "offset": 0.1}],
    }))
    return str(path)


class TestSolveCommand:
    def test_happy_path(self, instance_file, region_file, capsys):
        code = main([
            "solve", "--instance", instance_file, "--region", region_file,
            "--epsilon", "1e-5",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert set(out) == {"solution", "objective", "iterations", "status",
                            "kkt_residual"}
        assert out["status"] == "Converged"
        assert out["solution"][1] == pytest.approx(0.1, abs=1e-6)

    def test_iteration_cap_exit_code(self, instance_file, region_file, capsys):
        code = main([
            "solve", "--instance", instance_file, "--region", region_file,
            "--epsilon", "1e-12", "--max-iter", "2",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 2
        assert out["status"] == "MaxIterationsReached"

    def test_trace_csv(self, instance_file, region_file, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        code = main([
            "solve", "--instance", instance_file, "--region", region_file,
            "--trace", str(trace),
        ])
        assert code == 0
        rows = list(csv.reader(trace.open()))
        assert rows[0] == ["iter", "x0", "x1", "f", "step_norm"]
        assert len(rows) >= 3
        capsys.readouterr()

    def test_malformed_json_diagnoses_line(self, tmp_path, region_file, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"vertices": [[0, 0],\n  "weights": }')
        code = main(["solve", "--instance", str(bad), "--region", region_file])
        err = capsys.readouterr().err
        assert code == 1
        assert "line" in err and "column" in err

    def test_missing_file(self, region_file, capsys):
        code = main(["solve", "--instance", "nope.json", "--region", region_file])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_invalid_instance_reports_index(self, tmp_path, region_file, capsys):
        bad = tmp_path / "bad_weights.json"
        bad.write_text(json.dumps({
            "vertices": [[0, 0], [1, 0], [0, 1]],
            "weights": [1.0, -2.0, 1.0],
        }))
        code = main(["solve", "--instance", str(bad), "--region", region_file])
        err = capsys.readouterr().err
        assert code == 1
        assert "weights[1]" in err


class TestVerifyCommand:
    def test_self_contained_suite_passes(self, capsys):
        code = main(["verify", "--samples", "40", "--seed", "7"])
        captured = capsys.readouterr()
        assert code == 0
        assert "force_identity" in captured.err  # human-readable table
        assert "FAIL" not in captured.err
        summary = json.loads(captured.out)  # machine-readable summary
        assert summary["samples"] == 40
        assert summary["failures"] == 0
        assert summary["checks"]["force_identity"]["failures"] == 0

    def test_explicit_scenario(self, instance_file, region_file, capsys):
        code = main([
            "verify", "--instance", instance_file, "--region", region_file,
            "--samples", "25", "--seed", "3",
        ])
        assert code == 0
        capsys.readouterr()

    def test_half_specified_scenario_rejected(self, instance_file, capsys):
        code = main(["verify", "--instance", instance_file, "--samples", "5"])
        assert code == 1
        assert "both" in capsys.readouterr().err


class TestOracleCommand:
    def test_grid_method(self, instance_file, region_file, capsys):
        code = main([
            "oracle", "--method", "grid", "--instance", instance_file,
            "--region", region_file, "--resolution", "0.05", "--rounds", "2",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert len(out["point"]) == 2
        assert out["objective"] > 0.0

    def test_subgradient_method(self, instance_file, region_file, capsys):
        code = main([
            "oracle", "--method", "subgradient", "--instance", instance_file,
            "--region", region_file, "--steps", "500",
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["objective"] > 0.0

    def test_infeasible_bounds_error(self, instance_file, region_file, capsys):
        code = main([
            "oracle", "--method", "grid", "--instance", instance_file,
            "--region", region_file, "--bounds", "5", "5", "6", "6",
        ])
        assert code == 1
        assert "no feasible grid node" in capsys.readouterr().err


class TestBenchCommand:
    def test_single_experiment_smoke(self, tmp_path, capsys):
        out_dir = tmp_path / "bench"
        code = main([
            "bench", "--experiments", "1", "--seed", "1",
            "--baseline-steps", "200", "--out-dir", str(out_dir),
        ])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert (out_dir / "report.csv").exists()
        assert (out_dir / "report.json").exists()
        assert (out_dir / "plotdata_difference.csv").exists()
        assert (out_dir / "plotdata_feasibility.csv").exists()
        assert out["aggregates"]["num_experiments"] == 1


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "weberloc" in capsys.readouterr().out

    def test_unknown_flag_exits_with_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--what"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err
