import json
from pathlib import Path

import pytest

from infogauge.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(command, config, out, *extra):
    return main([command, "--config", str(config), "--out", str(out), *extra])


class TestInfoCommand:
    def test_unit_gaussian_potential_zero(self, tmp_path):
        assert run("info", CONFIGS / "info.json", tmp_path) == 0
        state = json.loads((tmp_path / "info_state.json").read_text())
        assert abs(state["Phi"]) <= 1e-6
        assert state["H"] == pytest.approx(1.418939, abs=1e-6)
        assert "config_sha256" in state

    def test_metadata_written(self, tmp_path):
        run("info", CONFIGS / "info.json", tmp_path)
        meta = json.loads((tmp_path / "run_metadata.json").read_text())
        assert "timestamp" in meta


class TestConserveCommand:
    def test_residuals_at_machine_precision(self, tmp_path):
        assert run("conserve", CONFIGS / "conserve.json", tmp_path) == 0
        report = json.loads((tmp_path / "conserve.json").read_text())
        assert abs(report["entropy_residual"]) <= 1e-10
        assert abs(report["fisher_residual"]) <= 1e-10
        assert report["pointwise_max_residual"] <= 1e-10
        table = (tmp_path / "conservation.csv").read_text()
        assert table.startswith("# config_sha256=")
        assert "entropy_grid" in table


class TestSpectralCommand:
    def test_projection_table_and_sweep(self, tmp_path):
        cfg = {
            "version": 1, "seed": 11,
            "density": {"path": str(CONFIGS / "bimodal_density.json")},
            "grid": {"extent": [12.0], "points": [256]},
            "orders": [0, 1, 2, 3], "cutoffs": [3.0, 5.0], "n_seeds": 8,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert run("spectral", path, tmp_path / "out") == 0
        report = json.loads((tmp_path / "out" / "spectral.json").read_text())
        assert report["sensitivity"]["3"] > 10 * report["sensitivity"]["0"]
        assert (tmp_path / "out" / "sweep_rows.csv").exists()
        assert (tmp_path / "out" / "sweep_summary.csv").exists()


class TestHeatflowCommand:
    def test_trace_csv_columns(self, tmp_path):
        cfg = {
            "version": 1,
            "density": {"path": str(CONFIGS / "bimodal_density.json")},
            "grid": {"extent": [64.0], "points": [2048]},
            "times": {"t_min": 0.02, "t_final": 50.0, "ratio": 1.3},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert run("heatflow", path, tmp_path / "out") == 0
        lines = (tmp_path / "out" / "flow_trace.csv").read_text().splitlines()
        assert lines[1] == "t,H,J,Phi,debruijn_resid,fisher_resid"
        report = json.loads((tmp_path / "out" / "heatflow.json").read_text())
        assert report["lyapunov_monotone"] is True
        assert report["j_strictly_decreasing"] is True


class TestLandscapeCommand:
    def test_complexity_report(self, tmp_path):
        assert run("landscape", CONFIGS / "landscape.json", tmp_path) == 0
        report = json.loads((tmp_path / "landscape.json").read_text())
        assert report["n_lm"] == 4
        assert abs(report["phi_mixture"] - report["log_nlm"]) <= 0.1
        assert len(report["minima"]) == 4


class TestConfigValidation:
    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"version": 1, "density": {}, "frobnicate": 1}))
        assert run("info", path, tmp_path) == 2

    def test_version_required(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"density": {}}))
        assert run("info", path, tmp_path) == 2

    def test_missing_seed_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "version": 1,
            "landscape": {"family": "cosine_sum", "amplitudes": [1.0],
                          "frequencies": [[1.0]], "beta": 200.0},
            "grid": {"extent": [2.0], "points": [128]},
            "delta": 0.01, "epsilon": 0.01,
        }))
        assert run("landscape", path, tmp_path) == 2

    def test_seed_flag_overrides(self, tmp_path):
        cfg = {
            "version": 1, "seed": 1,
            "density": {"path": str(CONFIGS / "bimodal_density.json")},
            "grid": {"extent": [12.0], "points": [256]},
            "orders": [0], "cutoffs": [3.0], "n_seeds": 2,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        run("spectral", path, tmp_path / "a")
        run("spectral", path, tmp_path / "b", "--seed", "2")
        a = (tmp_path / "a" / "sweep_rows.csv").read_text()
        b = (tmp_path / "b" / "sweep_rows.csv").read_text()
        assert a != b

    def test_unreadable_config(self, tmp_path):
        assert run("info", tmp_path / "missing.json", tmp_path) == 2

    def test_runtime_error_exits_one(self, tmp_path):
        # a box too small for the density fails the domain precondition
        cfg = {
            "version": 1,
            "density": {"path": str(CONFIGS / "bimodal_density.json")},
            "grid": {"extent": [4.0], "points": [64]},
            "times": {"t_min": 0.1, "t_final": 1.0},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert run("heatflow", path, tmp_path / "out") == 1


class TestDeterminism:
    def test_byte_identical_outputs(self, tmp_path):
        cfg = {
            "version": 1, "seed": 5,
            "density": {"path": str(CONFIGS / "bimodal_density.json")},
            "grid": {"extent": [12.0], "points": [256]},
            "orders": [0, 1, 2], "cutoffs": [3.0, 5.0], "n_seeds": 8,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        run("spectral", path, tmp_path / "a", "--format", "both")
        run("spectral", path, tmp_path / "b", "--format", "both")
        for name in ("sweep_rows.csv", "sweep_summary.csv", "projections.csv",
                     "projections.json", "spectral.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestSuiteCommand:
    def test_reduced_suite_passes(self, tmp_path, capsys):
        cfg = {"version": 1, "seed": 77, "n_datasets": 400, "sweep_seeds": 16,
               "check_determinism": False}
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(cfg))
        assert run("suite", path, tmp_path / "out") == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 8
        assert all(line.startswith("[PASS]") for line in lines)
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["all_passed"] is True
