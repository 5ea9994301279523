import json
import subprocess
import sys

import numpy as np
import pytest

from discoverability.cli import main


def run(tmp_path, *argv):
    return main(["--out-dir", str(tmp_path), *argv])


@pytest.fixture
def circle_csv(tmp_path):
    assert run(tmp_path, "simulate", "--system", "sho", "--x0", "1,0", "--t-end", "50", "--out", "circle.csv") == 0
    return tmp_path / "circle.csv"


def test_simulate_writes_header(circle_csv):
    lines = circle_csv.read_text().splitlines()
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 1 + 5001


def test_simulate_is_deterministic(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert run(tmp_path, "simulate", "--system", "lorenz", "--t-end", "5", "--out", name) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_find_vanishing(tmp_path, circle_csv):
    assert run(tmp_path, "find-vanishing", "--traj", str(circle_csv), "--degree", "2") == 0
    data = json.loads((tmp_path / "certs.json").read_text())
    assert len(data["certificates"]) == 1
    cert = data["certificates"][0]["original_coordinates"]
    coeffs = dict(zip(map(tuple, cert["exponents"]), cert["coeffs"]))
    assert coeffs[(2, 0)] == pytest.approx(1.0, abs=1e-8)
    assert coeffs[(0, 0)] == pytest.approx(-1.0, abs=1e-8)


def test_coverage_dimension_cells(tmp_path, circle_csv):
    assert run(tmp_path, "analyze-coverage", "--traj", str(circle_csv), "--domain=-1.1,1.1;-1.1,1.1") == 0
    assert (tmp_path / "coverage.csv").read_text().startswith("eps,fraction\n")
    assert json.loads((tmp_path / "coverage.json").read_text())["density"]["verdict"] == "non-dense"
    assert run(tmp_path, "decompose-cells", "--traj", str(circle_csv), "--eps", "0.05",
               "--domain=-1.1,1.1;-1.1,1.1") == 0
    assert json.loads((tmp_path / "cells.json").read_text())["n_components"] == 1
    # 5001 samples are below the box-counting floor
    assert run(tmp_path, "estimate-dimension", "--traj", str(circle_csv), "--method", "box") == 2


def test_first_integral_and_conservation(tmp_path, circle_csv):
    assert run(tmp_path, "find-first-integral", "--system", "sho", "--degree", "2") == 0
    fi = json.loads((tmp_path / "fi.json").read_text())
    assert fi["found"] and fi["certificate"]["residual"] < 1e-10
    assert run(tmp_path, "check-conservation", "--system", "sho", "--law", "sho-radial",
               "--traj", str(circle_csv), "--point", "1,0") == 0
    cons = json.loads((tmp_path / "cons.json").read_text())
    assert cons["kernel_inclusion"]["verdict"] == "uniqueness-evidence"


def test_analyze_with_config(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('system = "spiral"\nx0 = [[1.0, 0.0]]\nseed = 3\n[integrator]\nt_end = 100.0\n')
    out = tmp_path / "out"
    assert main(["analyze", "--config", str(cfg), "--out-dir", str(out)]) == 0
    data = json.loads((out / "report.json").read_text())
    assert data["parameters"]["seed"] == 3
    assert data["parameters"]["integrator"]["t_end"] == 100.0
    assert data["overall"] == "discoverable-evidence"


def test_global_flags_after_subcommand(tmp_path):
    assert main(["simulate", "--system", "sho", "--t-end", "1", "--out-dir", str(tmp_path), "--seed", "4"]) == 0
    assert (tmp_path / "traj.csv").exists()


def test_catalog_list(capsys):
    assert main(["catalog", "list"]) == 0
    ids = [e["id"] for e in json.loads(capsys.readouterr().out)]
    assert "lorenz" in ids and "sho" in ids


@pytest.mark.parametrize("argv", [
    ["simulate", "--system", "nope"],
    ["simulate", "--system", "sho", "--x0", "1,2,3"],
    ["simulate", "--system", "sho", "--t-end", "-1"],
    ["find-vanishing", "--traj", "missing.csv"],
    ["decompose-cells", "--traj", "missing.csv"],
])
def test_validation_exit_code(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_bad_csv_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,a,b\n0,1,2\n")
    assert run(tmp_path, "find-vanishing", "--traj", str(bad)) == 2


def test_bad_toml(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("system = \n")
    assert main(["--config", str(cfg), "analyze"]) == 2


def test_numerical_failure_exit_code(tmp_path):
    assert run(tmp_path, "simulate", "--system", "gradient-quadratic", "--x0", "1,1", "--t-end", "100") == 3


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["find-first-integral"])
    assert exc.value.code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "discoverability", "catalog", "laws"],
                         capture_output=True, text=True, check=True)
    assert {e["id"] for e in json.loads(out.stdout)} == {"sho-full", "sho-radial", "nilpotent"}
