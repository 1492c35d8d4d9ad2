"""Command line behavior: flags, exit codes, written files, determinism."""

import json
import shutil
import subprocess

import pytest

from cvpinn.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, main

TINY_ARGS = ["--iters", "2", "--layers", "1", "--batch", "4", "--cutoff", "20"]
TAG = "quadratic_sgd_ad_l1_b4_s0"


def run_main(tmp_path, *extra, figures=False):
    argv = [*TINY_ARGS, "--out", str(tmp_path), *extra]
    if not figures:
        argv.append("--no-figures")
    return main(argv)


class TestSingleRun:
    def test_success_writes_trace_and_summary(self, tmp_path, capsys):
        assert run_main(tmp_path) == EXIT_OK
        assert (tmp_path / f"{TAG}.csv").exists()
        summary = json.loads((tmp_path / f"{TAG}.json").read_text())
        assert summary["config"]["iterations"] == 2
        out = capsys.readouterr().out
        assert f"wrote {tmp_path / f'{TAG}.csv'}" in out
        assert '"final_error_norm"' in out

    def test_figures_rendered_by_default(self, tmp_path):
        assert run_main(tmp_path, figures=True) == EXIT_OK
        assert (tmp_path / f"{TAG}_loss.png").exists()
        assert (tmp_path / f"{TAG}_solution.png").exists()

    def test_no_figures_skips_pngs(self, tmp_path):
        run_main(tmp_path)
        assert not list(tmp_path.glob("*.png"))

    def test_config_error_exits_2(self, tmp_path, capsys):
        code = main(["--iters", "0", "--out", str(tmp_path), "--no-figures"])
        assert code == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_bad_choice_is_argparse_error(self):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["--optimizer", "newton"])
        assert excinfo.value.code == 2

    def test_numerical_failure_exits_3(self, tmp_path, capsys):
        code = main(
            [
                "--problem", "sinusoidal", "--cutoff", "12", "--iters", "1",
                "--layers", "1", "--batch", "4",
                "--out", str(tmp_path), "--no-figures",
            ]
        )
        assert code == EXIT_NUMERICAL
        err = capsys.readouterr().err
        assert "numerical failure" in err
        assert "config:" in err

    def test_same_seed_same_bytes(self, tmp_path):
        run_main(tmp_path / "a")
        run_main(tmp_path / "b")
        a = (tmp_path / "a" / f"{TAG}.csv").read_bytes()
        b = (tmp_path / "b" / f"{TAG}.csv").read_bytes()
        assert a == b


class TestSuiteRun:
    def test_depth_suite(self, tmp_path, capsys):
        code = run_main(tmp_path, "--suite", "depth")
        assert code == EXIT_OK
        for n in (2, 4, 8):
            assert (tmp_path / f"depth_layers{n}.csv").exists()
        assert (tmp_path / "depth_summary.csv").exists()
        out = capsys.readouterr().out
        assert "cell,status,final_error_norm,wall_seconds" in out

    def test_suite_figures(self, tmp_path):
        assert run_main(tmp_path, "--suite", "depth", figures=True) == EXIT_OK
        assert (tmp_path / "depth_loss.png").exists()
        assert (tmp_path / "depth_error.png").exists()


def test_console_script(tmp_path):
    script = shutil.which("cvpinn")
    if script is None:
        pytest.skip("console script not on PATH; install the package first")
    result = subprocess.run(
        [script, *TINY_ARGS, "--out", str(tmp_path), "--no-figures"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert result.returncode == EXIT_OK, result.stderr
    assert (tmp_path / f"{TAG}.csv").exists()
