import json

import numpy as np
import pytest

from bernoulli_detector.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def step_files(tmp_path):
    data = tmp_path / "data.csv"
    truth = tmp_path / "truth.json"
    code = run_cli(
        "simulate", "--preset", "single-step", "--snr", 10, "--seed", 42,
        "--out", data, "--truth-out", truth,
    )
    assert code == 0
    return data, truth


class TestSimulate:
    def test_single_step_files(self, step_files, tmp_path):
        data, truth = step_files
        rows = data.read_text().strip().splitlines()
        assert rows[0] == "series_1"
        assert len(rows) == 101  # header + 100 points
        doc = json.loads(truth.read_text())
        assert doc["change_points"] == {"series_1": [50]}
        assert doc["n_points"] == 100
        assert doc["manifest"]["command"] == "simulate"

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            assert run_cli(
                "simulate", "--preset", "multi-step", "--seed", 9, "--out", path
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_dependent_preset_shape(self, tmp_path):
        out = tmp_path / "dep.csv"
        truth = tmp_path / "dep_truth.json"
        assert run_cli(
            "simulate", "--preset", "dependent", "--seed", 1,
            "--out", out, "--truth-out", truth,
        ) == 0
        header = out.read_text().splitlines()[0].split(",")
        assert len(header) == 4
        doc = json.loads(truth.read_text())
        assert len(doc["change_points"]["series_1"]) == 19

    def test_scenario_file(self, tmp_path):
        scenario = tmp_path / "scenario.json"
        scenario.write_text(
            json.dumps(
                {
                    "kind": "piecewise",
                    "n": 40,
                    "boundaries": [20],
                    "means": [0.0, 4.0],
                    "sigma": 0.1,
                }
            )
        )
        out = tmp_path / "custom.csv"
        truth = tmp_path / "custom_truth.json"
        assert run_cli(
            "simulate", "--scenario", scenario, "--seed", 3,
            "--out", out, "--truth-out", truth,
        ) == 0
        doc = json.loads(truth.read_text())
        assert doc["change_points"] == {"series_1": [20]}

    def test_invalid_scenario_rejected(self, tmp_path):
        scenario = tmp_path / "bad.json"
        scenario.write_text(json.dumps({"kind": "piecewise", "n": 10}))
        assert run_cli("simulate", "--scenario", scenario) == 2


class TestDetect:
    def test_round_trip_single_step(self, step_files, tmp_path):
        data, truth = step_files
        report = tmp_path / "report.json"
        assert run_cli(
            "detect", data, "--method", "bd-uni-pseudo", "--iterations", 300,
            "--seed", 7, "--out", report,
        ) == 0
        doc = json.loads(report.read_text())
        assert doc["change_points"]["series_1"] == [50]
        assert doc["manifest"]["parameters"]["method"] == "bd-uni-pseudo"
        metrics = tmp_path / "metrics.json"
        assert run_cli(
            "evaluate", truth, report, "--tolerance", 0, "--out", metrics
        ) == 0
        result = json.loads(metrics.read_text())["results"][0]
        assert result["pooled"]["recall"] == 1.0
        assert result["pooled"]["precision"] == 1.0

    def test_reports_are_byte_identical(self, step_files, tmp_path):
        data, _ = step_files
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out_a, out_b):
            assert run_cli(
                "detect", data, "--method", "bd-uni-blocked",
                "--iterations", 120, "--seed", 5, "--out", out,
            ) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_alpha_range_enforced(self, step_files):
        data, _ = step_files
        assert run_cli("detect", data, "--alpha", 0.5) == 2
        assert run_cli("detect", data, "--alpha", -1) == 2

    def test_malformed_csv_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n3,oops\n4,5\n6,7\n")
        assert run_cli("detect", bad) == 3

    def test_non_finite_value_is_data_error(self, tmp_path):
        bad = tmp_path / "nan.csv"
        bad.write_text("x\n1\nnan\n3\n4\n")
        assert run_cli("detect", bad) == 3

    def test_too_short_series_is_data_error(self, tmp_path):
        bad = tmp_path / "short.csv"
        bad.write_text("x\n1\n2\n3\n")
        assert run_cli("detect", bad) == 3

    def test_multi_on_constant_data_is_empty(self, tmp_path):
        data = tmp_path / "flat.csv"
        rng = np.random.default_rng(0)
        rows = ["a,b"] + [f"{float(u)!r},{float(v)!r}" for u, v in rng.normal(size=(30, 2))]
        data.write_text("\n".join(rows) + "\n")
        report = tmp_path / "flat_report.json"
        assert run_cli(
            "detect", data, "--method", "bd-multi", "--iterations", 150,
            "--seed", 3, "--out", report,
        ) == 0
        doc = json.loads(report.read_text())
        assert doc["change_points"] == {"a": [], "b": []}
        assert "p_config_summary" in doc

    def test_capacity_error_without_configs(self, tmp_path):
        data = tmp_path / "wide.csv"
        rng = np.random.default_rng(1)
        rows = [",".join(f"{float(v)!r}" for v in row) for row in rng.normal(size=(6, 13))]
        data.write_text("\n".join(rows) + "\n")
        assert run_cli("detect", data, "--method", "bd-multi") == 2

    def test_configs_file_restricts_patterns(self, tmp_path):
        data = tmp_path / "pair.csv"
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.normal(0, 0.3, 15), rng.normal(3, 0.3, 15)])
        y = np.concatenate([rng.normal(0, 0.3, 15), rng.normal(3, 0.3, 15)])
        data.write_text(
            "a,b\n" + "\n".join(f"{float(u)!r},{float(v)!r}" for u, v in zip(x, y)) + "\n"
        )
        configs = tmp_path / "configs.txt"
        configs.write_text("00\n11\n")
        report = tmp_path / "report.json"
        assert run_cli(
            "detect", data, "--method", "bd-multi", "--configs", configs,
            "--iterations", 200, "--seed", 1, "--out", report,
        ) == 0
        doc = json.loads(report.read_text())
        assert doc["change_points"]["a"] == doc["change_points"]["b"]

    def test_bad_configs_rejected(self, tmp_path, step_files):
        data, _ = step_files
        configs = tmp_path / "configs.txt"
        configs.write_text("01\n10\n")  # all-zeros missing
        assert run_cli(
            "detect", data, "--method", "bd-multi", "--configs", configs
        ) == 2

    def test_tv_method(self, step_files, tmp_path):
        data, truth = step_files
        report = tmp_path / "tv.json"
        assert run_cli(
            "detect", data, "--method", "tv", "--lambda", 22.3,
            "--threshold", 1e-10, "--out", report,
        ) == 0
        doc = json.loads(report.read_text())
        assert 50 in doc["change_points"]["series_1"]
        assert doc["map_log_score"] is None

    def test_csv_export(self, step_files, tmp_path):
        data, _ = step_files
        report = tmp_path / "r.json"
        flat = tmp_path / "r.csv"
        assert run_cli(
            "detect", data, "--iterations", 100, "--seed", 2,
            "--out", report, "--csv", flat,
        ) == 0
        lines = flat.read_text().strip().splitlines()
        assert lines[0] == "series,time,marginal_probability,is_change_point"
        assert len(lines) == 101


class TestEvaluate:
    def test_empty_report_conventions(self, tmp_path):
        truth = tmp_path / "t.json"
        report = tmp_path / "r.json"
        truth.write_text(json.dumps({"n_points": 50, "change_points": {"s": [10]}}))
        report.write_text(json.dumps({"n_points": 50, "change_points": {"s": []}}))
        out = tmp_path / "m.json"
        assert run_cli("evaluate", truth, report, "--out", out) == 0
        result = json.loads(out.read_text())["results"][0]
        assert result["pooled"]["recall"] == 0.0
        assert result["pooled"]["precision"] == 1.0

    def test_series_mismatch_is_data_error(self, tmp_path):
        truth = tmp_path / "t.json"
        report = tmp_path / "r.json"
        truth.write_text(json.dumps({"change_points": {"a": [3]}}))
        report.write_text(json.dumps({"change_points": {"b": [3]}}))
        assert run_cli("evaluate", truth, report) == 3

    def test_length_mismatch_is_data_error(self, tmp_path):
        truth = tmp_path / "t.json"
        report = tmp_path / "r.json"
        truth.write_text(json.dumps({"n_points": 10, "change_points": {"a": [3]}}))
        report.write_text(json.dumps({"n_points": 12, "change_points": {"a": [3]}}))
        assert run_cli("evaluate", truth, report) == 3

    def test_tolerance_sweep(self, tmp_path):
        truth = tmp_path / "t.json"
        report = tmp_path / "r.json"
        truth.write_text(json.dumps({"change_points": {"a": [10, 30]}}))
        report.write_text(json.dumps({"change_points": {"a": [12, 30]}}))
        out = tmp_path / "m.json"
        assert run_cli(
            "evaluate", truth, report,
            "--tolerance", 0, "--tolerance", 1, "--tolerance", 5, "--out", out,
        ) == 0
        results = json.loads(out.read_text())["results"]
        assert [r["tolerance"] for r in results] == [0, 1, 5]
        assert [r["pooled"]["tp"] for r in results] == [1, 1, 2]


class TestBenchFdr:
    def test_deterministic_single_row(self, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out_a, out_b):
            assert run_cli(
                "bench-fdr", "--alphas", 0.01, "--replicates", 1,
                "--iterations", 40, "--tolerances", 5, "--seed", 4, "--out", out,
            ) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        lines = out_a.read_text().strip().splitlines()
        assert lines[0].startswith("# manifest: ")
        assert lines[1] == "alpha,tolerance,fdr_mean,fdr_std,replicates"
        assert len(lines) == 3

    def test_alpha_out_of_range_rejected_before_running(self, tmp_path):
        assert run_cli(
            "bench-fdr", "--alphas", 0.01, 0.4, "--replicates", 1,
            "--iterations", 10,
        ) == 2


class TestSeedEnvVar:
    def test_env_default_seed(self, tmp_path, monkeypatch):
        out_env = tmp_path / "env.csv"
        out_flag = tmp_path / "flag.csv"
        monkeypatch.setenv("BERNOULLI_DETECTOR_SEED", "123")
        assert run_cli(
            "simulate", "--preset", "single-step", "--out", out_env
        ) == 0
        monkeypatch.delenv("BERNOULLI_DETECTOR_SEED")
        assert run_cli(
            "simulate", "--preset", "single-step", "--seed", 123, "--out", out_flag
        ) == 0
        assert out_env.read_bytes() == out_flag.read_bytes()

    def test_bad_env_seed_is_validation_error(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BERNOULLI_DETECTOR_SEED", "abc")
        assert run_cli("simulate", "--preset", "single-step") == 2
