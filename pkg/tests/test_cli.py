"""Command-line harness: artifacts, reproducibility, exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from heislab import ExperimentConfig, __version__
from heislab.cli import main, run

FAST = ["--set", "m = 400", "--set", "N = 50"]


@pytest.fixture()
def runner():
    return CliRunner()


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


class TestWiring:
    def test_help_lists_subcommands(self, runner):
        res = runner.invoke(main, ["--help"])
        assert res.exit_code == 0
        for name in ("simulate", "heat-check", "lsi-scan",
                     "quotient-check", "distance", "levy-cf"):
            assert name in res.output

    def test_version(self, runner):
        res = runner.invoke(main, ["--version"])
        assert res.exit_code == 0 and __version__ in res.output

    def test_console_script_is_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "heislab.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0 and __version__ in proc.stdout

    def test_run_rejects_unknown_subcommand(self):
        assert run("frobnicate", ExperimentConfig()) == 2


class TestSimulate:
    def test_artifacts_and_content(self, runner, tmp_path):
        out = tmp_path / "sim"
        res = runner.invoke(main, ["simulate", *FAST, "--set", "t = 0.5, 1",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert "simulate: ok (4 rows)" in res.output

        report = json.loads(_read(out / "report.json"))
        assert report["schema_version"] == 1
        assert report["subcommand"] == "simulate"
        assert report["overall_pass"] is True
        assert len(report["config"]) == 20
        assert "m = 400" in report["config"]
        moments = report["results"]["moments"]
        assert len(moments) == 4
        assert {row["metric"] for row in moments} == {"hnorm_sq", "c_sq"}
        by_key = {(row["t"], row["metric"]): row for row in moments}
        assert by_key[(1.0, "hnorm_sq")]["expected"] == 2.0
        assert by_key[(1.0, "c_sq")]["expected"] == 0.25 * (1.0 - 1.0 / 50)

        csv_lines = _read(out / "summary.csv").splitlines()
        echo = [ln for ln in csv_lines if ln.startswith("# ")]
        assert len(echo) == 20 and "# m = 400" in echo
        header_idx = len(echo)
        assert csv_lines[header_idx] == "t,metric,mean,std_error,expected,z,pass"
        assert len(csv_lines) == header_idx + 1 + 4

        manifest = json.loads(_read(out / "manifest.json"))
        assert manifest["schema_version"] == 1
        assert set(manifest["versions"]) == {"python", "numpy", "scipy", "click", "package"}
        assert manifest["seed"] == 42
        assert "wall_time_s" in manifest and "generated_unix" in manifest
        assert manifest["config_defaults"][0].startswith("K = ")
        # timing never leaks into the deterministic artifacts
        assert "wall_time" not in _read(out / "report.json")

    def test_dump_endpoints(self, runner, tmp_path):
        out = tmp_path / "sim"
        res = runner.invoke(main, ["simulate", *FAST, "--dump-endpoints",
                                   "--out", str(out)])
        assert res.exit_code == 0
        lines = _read(out / "endpoints.csv").splitlines()
        assert lines[20] == "sample,w_1,w_2,c,theta"
        assert len(lines) == 20 + 1 + 400
        report = json.loads(_read(out / "report.json"))
        assert report["results"]["endpoints_csv_ref"] == "endpoints.csv"
        assert report["results"]["endpoints_t"] == 1.0

    def test_default_out_dir_name(self, runner):
        with runner.isolated_filesystem():
            res = runner.invoke(main, ["simulate", *FAST])
            assert res.exit_code == 0
            assert Path("simulate-out/report.json").exists()


class TestReproducibility:
    def test_reruns_are_byte_identical(self, runner, tmp_path):
        args = ["simulate", *FAST, "--set", "seed = 7"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, [*args, "--out", str(a)]).exit_code == 0
        assert runner.invoke(main, [*args, "--out", str(b)]).exit_code == 0
        assert _read(a / "report.json") == _read(b / "report.json")
        assert _read(a / "summary.csv") == _read(b / "summary.csv")

    def test_worker_count_does_not_change_bytes(self, runner, tmp_path):
        base = ["simulate", "--set", "m = 512", "--set", "N = 20"]
        a, b = tmp_path / "serial", tmp_path / "threads"
        assert runner.invoke(main, [*base, "--out", str(a)]).exit_code == 0
        assert runner.invoke(
            main, [*base, "--workers", "8", "--out", str(b)]
        ).exit_code == 0
        assert _read(a / "report.json") == _read(b / "report.json")
        assert _read(a / "summary.csv") == _read(b / "summary.csv")

    def test_config_file_plus_override(self, runner, tmp_path):
        cfg_file = tmp_path / "exp.cfg"
        cfg_file.write_text("m = 300\nN = 50\nseed = 9\n", encoding="utf-8")
        out = tmp_path / "o"
        res = runner.invoke(main, ["simulate", "--config", str(cfg_file),
                                   "--set", "m = 400", "--out", str(out)])
        assert res.exit_code == 0
        report = json.loads(_read(out / "report.json"))
        assert "m = 400" in report["config"] and "seed = 9" in report["config"]


class TestExitCodes:
    def test_failing_row_exits_one(self, runner, tmp_path):
        # a huge central-difference step has O(delta_t^2) bias far beyond
        # the Monte-Carlo noise on the curved gauss_bump profile
        out = tmp_path / "h"
        res = runner.invoke(main, [
            "heat-check", "--set", "m = 2000", "--set", "N = 50",
            "--set", "f = gauss_bump(1.0)", "--set", "delta_t = 0.95",
            "--out", str(out),
        ])
        assert res.exit_code == 1
        assert "FAIL" in res.output
        report = json.loads(_read(out / "report.json"))
        assert report["overall_pass"] is False
        assert report["results"]["heat_check"][0]["pass"] is False

    def test_unknown_key_exits_two(self, runner):
        res = runner.invoke(main, ["simulate", "--set", "bogus = 1"])
        assert res.exit_code == 2
        assert "config error" in res.stderr and "unknown key" in res.stderr

    def test_missing_config_file_exits_two(self, runner):
        res = runner.invoke(main, ["simulate", "--config", "no/such/file.cfg"])
        assert res.exit_code == 2

    def test_delta_t_wider_than_grid_exits_two(self, runner):
        res = runner.invoke(main, ["heat-check", *FAST, "--set", "delta_t = 1.5"])
        assert res.exit_code == 2
        assert "delta_t" in res.stderr

    def test_aperiodic_quotient_function_exits_two(self, runner):
        res = runner.invoke(main, ["quotient-check", *FAST,
                                   "--set", "f = vertical_sq"])
        assert res.exit_code == 2
        assert "periodic" in res.stderr

    def test_unwritable_out_dir_exits_two(self, runner, tmp_path):
        blocker = tmp_path / "occupied"
        blocker.write_text("a file, not a directory", encoding="utf-8")
        # the --out flag is screened by the argument parser itself
        res = runner.invoke(main, ["simulate", *FAST, "--out", str(blocker)])
        assert res.exit_code == 2
        assert "Invalid value" in res.stderr
        # the config key reaches the artifact writer, which must also refuse
        res = runner.invoke(main, ["simulate", *FAST, "--set", f"out = {blocker}"])
        assert res.exit_code == 2
        assert "cannot write" in res.stderr


class TestLsiScan:
    def test_cells_and_summaries(self, runner, tmp_path):
        out = tmp_path / "scan"
        res = runner.invoke(main, [
            "lsi-scan", "--set", "m = 500", "--set", "N = 50",
            "--set", "dims = 1, 2", "--set", "f = exp_linear(0.5), poly_radial",
            "--out", str(out),
        ])
        assert res.exit_code == 0, res.output
        report = json.loads(_read(out / "report.json"))
        cells = report["results"]["cells"]
        assert len(cells) == 2 * 2 * 2  # dims x families x functions at one t
        expected_keys = {
            "form_name", "f_name", "n", "t", "m", "entropy", "entropy_se",
            "energy", "energy_se", "ratio", "ratio_se", "c_ref", "bound",
            "passed", "status", "message", "space", "base_seed",
        }
        assert set(cells[0]) == expected_keys
        assert cells[0]["space"] == "G" and cells[0]["base_seed"] == 42
        summaries = report["results"]["summaries"]["1.0"]
        assert set(summaries) == {"per_dimension_max", "per_form_max"}
        assert set(summaries["per_dimension_max"]) == {"1", "2"}

        header = _read(out / "summary.csv").splitlines()[20]
        assert header == ("n,t,form,f,entropy,entropy_se,energy,energy_se,"
                          "ratio,ratio_se,bound,pass")
        dat = _read(out / "max_ratio_vs_n_t0.dat").splitlines()
        assert dat[20] == "# columns: n max_ratio"
        assert len(dat) == 20 + 1 + 2  # echo + columns + one point per dim


class TestQuotientCheck:
    def test_bitwise_rows(self, runner, tmp_path):
        out = tmp_path / "q"
        res = runner.invoke(main, ["quotient-check", *FAST, "--out", str(out)])
        assert res.exit_code == 0
        report = json.loads(_read(out / "report.json"))
        row = report["results"]["quotient_check"][0]
        assert row["f"] == "cos_theta"
        assert row["value_max_diff"] == 0.0 and row["gradsq_max_diff"] == 0.0
        assert row["entropy_reduced"] == row["entropy_lifted"]
        assert row["pass"] is True


class TestDistance:
    def test_full_group_target(self, runner, tmp_path):
        out = tmp_path / "d"
        res = runner.invoke(main, ["distance", "--set", "K = 16", "--out", str(out)])
        assert res.exit_code == 0
        report = json.loads(_read(out / "report.json"))
        assert abs(report["results"]["estimate"] - 5.0) <= 1e-3
        assert report["results"]["winning_k"] is None
        assert report["results"]["converged"] is True
        assert "fiber_candidates" not in report["results"]
        path_lines = _read(out / "path.csv").splitlines()
        assert path_lines[20] == "node,w_1,w_2,c"
        assert len(path_lines) == 20 + 1 + 17
        assert (out / "path_plane.dat").exists()

    def test_reduced_target_unwinds(self, runner, tmp_path):
        out = tmp_path / "dr"
        res = runner.invoke(main, [
            "distance", "--set", "space = Gtilde", "--set", "K = 16",
            "--set", "k_window = 2", "--set", "target_w = 0, 0",
            "--set", "target_c = 6.233185307179586",
            "--out", str(out),
        ])
        assert res.exit_code == 0
        results = json.loads(_read(out / "report.json"))["results"]
        assert results["winning_k"] == -1
        ks = [cand["k"] for cand in results["fiber_candidates"]]
        assert ks == [-2, -1, 0, 1, 2]
        assert results["estimate"] <= 0.81

    def test_wrong_target_dimension_exits_two(self, runner):
        res = runner.invoke(main, ["distance", "--set", "target_w = 1, 2, 3"])
        assert res.exit_code == 2
        assert "target_w" in res.stderr


class TestLevyCf:
    def test_curve_against_reference(self, runner, tmp_path):
        out = tmp_path / "cf"
        res = runner.invoke(main, [
            "levy-cf", "--set", "m = 2000", "--set", "N = 100",
            "--set", "lambdas = 0.5, 1", "--out", str(out),
        ])
        assert res.exit_code == 0
        report = json.loads(_read(out / "report.json"))
        rows = report["results"]["char_function"]
        assert [row["lambda"] for row in rows] == [0.5, 1.0]
        assert all(row["pass"] for row in rows)
        assert rows[0]["reference"] == pytest.approx(
            1.0 / __import__("math").cosh(0.25), rel=1e-12)
        assert (out / "cf_curve_t0.dat").exists()
        assert (out / "cf_reference_t0.dat").exists()
