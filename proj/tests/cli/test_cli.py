"""End-to-end CLI tests: every subcommand driven as a subprocess, checking
stdout contracts, file outputs, and exit codes.

Environment (set by ctest): BOOTLAW_BIN points at the built binary,
BOOTLAW_FIXTURES at the shipped coefficient fixtures."""

import json
import math
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ["BOOTLAW_BIN"]
FIXTURES = Path(os.environ["BOOTLAW_FIXTURES"])


def run(*args, expect=0):
    proc = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)
    assert proc.returncode == expect, (
        f"exit {proc.returncode}, wanted {expect}\n"
        f"stdout:\n{proc.stdout}\nstderr:\n{proc.stderr}"
    )
    return proc


def field(stdout, key):
    """Parse `key = value [unit]` lines from subcommand output."""
    for line in stdout.splitlines():
        if line.startswith(key + " ="):
            return float(line.split("=", 1)[1].split()[0])
    raise AssertionError(f"no '{key} =' line in:\n{stdout}")


def write_params(path, **params):
    path.write_text(json.dumps(params))
    return str(path)


def test_help_and_usage_errors():
    proc = run("--help")
    for sub in ("fit", "compare", "trend", "breakeven", "allocate",
                "catchup", "synth", "predict", "validate"):
        assert sub in proc.stdout
    run(expect=2)                      # a subcommand is required
    run("--no-such-flag", expect=2)
    run("fit", expect=2)               # missing required csv argument
    run("fit", "x.csv", "--family", "bogus", expect=2)
    run("breakeven", "--scratch", "a", "--grown", "b", "--n", "nonsense", expect=2)


def test_version():
    assert "bootlaw" in run("--version").stdout


def test_synth_validate_fit_pipeline(tmp_path):
    truth = write_params(tmp_path / "truth.json",
                         A=100.0, alpha1=0.3, alpha2=0.25, E=0.6)
    csv = str(tmp_path / "runs.csv")
    proc = run("synth", "--family", "mul-no-interaction", "--params", truth,
               "--out", csv, "--grid", "4x4",
               "--d1-range", "1e8:1e11", "--d2-range", "1e8:1e11")
    assert "wrote 16 records" in proc.stdout

    proc = run("validate", csv)
    assert "ok: 16 records" in proc.stdout
    assert "(4 distinct)" in proc.stdout
    assert "synth (16)" in proc.stdout

    fit_json = tmp_path / "fit.json"
    resid_tsv = tmp_path / "resid.tsv"
    proc = run("fit", csv, "--family", "mul-no-interaction", "--loo",
               "--out", str(fit_json), "--plot", str(resid_tsv))
    assert "family: mul-no-interaction" in proc.stdout
    assert "loo rms:" in proc.stdout

    report = json.loads(fit_json.read_text())
    assert report["family"] == "mul-no-interaction"
    assert report["params"]["alpha1"] == pytest.approx(0.3, abs=1e-4)
    assert report["params"]["A"] == pytest.approx(100.0, rel=1e-3)
    assert report["loo_rms"] < 1e-6
    assert report["best_converged"] is True

    lines = resid_tsv.read_text().splitlines()
    assert lines[0].startswith("#")
    assert sum(1 for line in lines if line and not line.startswith("#")) == 16


def test_validate_split(tmp_path):
    truth = write_params(tmp_path / "truth.json", A=50.0, alpha=0.3, E=0.8)
    csv = str(tmp_path / "runs.csv")
    run("synth", "--family", "power-law-1d", "--params", truth, "--out", csv,
        "--grid", "4x4", "--d2-range", "1e8:1e11", "--sigma", "0.01", "--seed", "3")

    train_csv = tmp_path / "train.csv"
    holdout_csv = tmp_path / "holdout.csv"
    proc = run("validate", csv, "--split", "0.25",
               "--train-out", str(train_csv), "--holdout-out", str(holdout_csv))
    assert "split: 12 train / 4 holdout" in proc.stdout
    assert "ok: 12 records" in run("validate", str(train_csv)).stdout
    assert "ok: 4 records" in run("validate", str(holdout_csv)).stdout


def test_compare_ranks_generating_form(tmp_path):
    truth = write_params(tmp_path / "truth.json",
                         A=100.0, alpha1=0.3, alpha2=0.25, E=0.6)
    csv = str(tmp_path / "runs.csv")
    run("synth", "--family", "mul-no-interaction", "--params", truth,
        "--out", csv, "--grid", "4x4",
        "--d1-range", "1e8:1e11", "--d2-range", "1e8:1e11")

    cmp_json = tmp_path / "cmp.json"
    proc = run("compare", csv, "--families", "mul-no-interaction,power-law-1d",
               "--max-starts", "400", "--out", str(cmp_json))
    assert proc.stdout.startswith("1. mul-no-interaction")

    table = json.loads(cmp_json.read_text())
    assert table[0]["family"] == "mul-no-interaction"
    assert table[0]["ok"] is True
    assert table[1]["family"] == "power-law-1d"


def test_trend(tmp_path):
    truth = write_params(tmp_path / "truth.json",
                         A=3e4, alpha1=0.515, alpha2=0.35, alpha3=0.017, E=2.2)
    csv = str(tmp_path / "runs.csv")
    run("synth", "--family", "mul-interaction", "--params", truth, "--out", csv,
        "--grid", "5x5", "--d1-range", "1e8:1e11", "--d2-range", "1e8:1e11")

    slices_tsv = tmp_path / "slices.tsv"
    trend_json = tmp_path / "trend.json"
    proc = run("trend", csv, "--slices", str(slices_tsv), "--out", str(trend_json))
    assert "slices: 5" in proc.stdout
    assert "exponent trend:" in proc.stdout

    doc = json.loads(trend_json.read_text())
    assert doc["exponent"]["gamma"] == pytest.approx(0.017, rel=0.02)
    assert doc["factor"]["alpha1"] == pytest.approx(0.515, rel=0.02)
    assert slices_tsv.read_text().startswith("#")


def test_predict_with_token_suffixes():
    proc = run("predict", "--family", "joint-cpt",
               "--params", FIXTURES / "stack_growth.json",
               "--d1", "13T", "--d2", "13T", "--n", "1e11")
    assert field(proc.stdout, "loss") == pytest.approx(1.34561776942275685, rel=1e-11)
    assert field(proc.stdout, "ln loss") == pytest.approx(0.29685321572512426, abs=1e-11)


def test_breakeven_on_fixtures():
    proc = run("breakeven", "--scratch", FIXTURES / "base_web.json",
               "--grown", FIXTURES / "stack_growth.json", "--n", "1e11", "--analytic")
    d_star = field(proc.stdout, "D*")
    assert 0.9e13 < d_star < 1.7e13
    assert field(proc.stdout, "residual") < 1e-9
    assert field(proc.stdout, "crossings") == 1
    assert field(proc.stdout, "analytic") == 13e12


def test_allocate_growth_and_cpt():
    proc = run("allocate", "--params", FIXTURES / "stack_growth.json",
               "--d1", "1T", "--c2", "1e21")
    assert field(proc.stdout, "d2_opt") == pytest.approx(1.1403841831205869e9, rel=1e-9)
    assert field(proc.stdout, "n_opt") == pytest.approx(7.307478880082071e10, rel=1e-9)

    proc = run("allocate", "--params", FIXTURES / "cpt_code.json",
               "--d1", "1T", "--c2", "1e21", "--mode", "cpt")
    assert field(proc.stdout, "a") == pytest.approx(0.70755632933091, rel=1e-9)
    assert "mode = cpt" in proc.stdout


def test_catchup_with_sensitivity():
    proc = run("catchup", "--scratch", FIXTURES / "scratch_code.json",
               "--boot", FIXTURES / "cpt_code.json",
               "--d1", "1e13", "--d2", "300B", "--n", "7B")
    assert field(proc.stdout, "bootstrapped loss") == pytest.approx(
        0.51128277276484085, abs=1e-11)
    assert field(proc.stdout, "catch-up") > 1e6

    proc = run("catchup", "--scratch", FIXTURES / "scratch_code.json",
               "--boot", FIXTURES / "cpt_code.json",
               "--d1", "1e13", "--d2", "300B", "--n", "7B", "--sensitivity", "5e-4")
    rows = [line for line in proc.stdout.splitlines() if "alpha3 =" in line]
    assert len(rows) == 3
    assert "unreachable" not in proc.stdout


def test_operation_errors_exit_1(tmp_path):
    proc = run("fit", "/nonexistent/runs.csv", expect=1)
    assert "error:" in proc.stderr

    # Saturated interaction: allocation has no interior optimum.
    proc = run("allocate", "--params", FIXTURES / "stack_growth.json",
               "--d1", "1e18", "--c2", "1e21", expect=1)
    assert "saturated" in proc.stderr

    # Laws that never cross.
    scratch = write_params(tmp_path / "s.json", A=5.0, alpha=0.3,
                           B=1e-6, beta=0.5, E=1.5)
    grown = write_params(tmp_path / "g.json", A=5.0, alpha1=0.15, alpha2=0.15,
                         alpha3=0.0, B=1e-6, beta=0.5, E=0.5)
    proc = run("breakeven", "--scratch", scratch, "--grown", grown, "--n", "1e9",
               expect=1)
    assert "no break-even crossing" in proc.stderr


def test_deterministic_output(tmp_path):
    truth = write_params(tmp_path / "truth.json", A=50.0, alpha=0.3, E=0.8)
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    args = ("synth", "--family", "power-law-1d", "--params", truth,
            "--grid", "3x3", "--d2-range", "1e8:1e10",
            "--sigma", "0.01", "--seed", "11")
    run(*args, "--out", a)
    run(*args, "--out", b)
    assert Path(a).read_text() == Path(b).read_text()
