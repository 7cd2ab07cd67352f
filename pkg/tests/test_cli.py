import json

import numpy as np
import pytest

from picput._io import read_csv_rows
from picput.cli import main


@pytest.fixture
def files(tmp_path):
    pmf = tmp_path / "pmf.json"
    pmf.write_text(json.dumps({"s_labels": ["a", "b"], "x_labels": ["u", "v"],
                               "pmf": [[0.45, 0.05], [0.05, 0.45]]}))
    fns = tmp_path / "fns.json"
    fns.write_text(json.dumps({"useful": [[-1, 1]], "private": [[-1, 1]], "thetas": [0.5]}))
    return tmp_path, pmf, fns


def test_pic(files, capsys):
    _, pmf, _ = files
    assert main(["pic", "--pmf", str(pmf)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["lambdas"] == [0.64]
    assert out["chi2"] == pytest.approx(0.64)


def test_put_bounds(files, capsys):
    _, pmf, _ = files
    assert main(["put-bounds", "--pmf", str(pmf), "--eps-grid", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# picput 0.1.0")
    assert lines[1] == "eps,lower,upper,simple_dpi"
    assert len(lines) == 2 + 50


def test_design(files):
    tmp, pmf, fns = files
    assert main(["design", "--pmf", str(pmf), "--functions", str(fns), "--out", str(tmp / "d")]) == 0
    sol = json.loads((tmp / "d/solution.json").read_text())
    assert sol["verified"]
    assert sol["sigma"][0] == pytest.approx(np.sqrt(0.5), abs=1e-9)
    _, rows = read_csv_rows(tmp / "d/mmse.csv")
    assert float(rows[0]["private_0"]) >= 0.5 - 1e-8


def test_design_grid(files):
    tmp, pmf, fns = files
    assert main(["design", "--pmf", str(pmf), "--functions", str(fns), "--theta-grid", "0:1:3",
                 "--objective", "min", "--out", str(tmp / "g")]) == 0
    _, rows = read_csv_rows(tmp / "g/mmse.csv")
    assert [r["theta"] for r in rows] == ["0", "0.5", "1"]


def test_mmse_bound(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"rhos": [0.6, 0.8], "nus": [0.7, 0.7], "t": 2}))
    assert main(["mmse-bound", "--spec", str(spec)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["bound"] == pytest.approx(0.51)
    assert out["value"] == pytest.approx(0.7)


def test_robustness(files):
    tmp, pmf, _ = files
    args = ["robustness", "--pmf", str(pmf), "--n", "500", "--trials", "4", "--seed", "2",
            "--beta", "0.1", "--out"]
    assert main(args + [str(tmp / "r1")]) == 0
    assert main(args + [str(tmp / "r2")]) == 0
    a = (tmp / "r1/robustness.csv").read_bytes()
    assert a == (tmp / "r2/robustness.csv").read_bytes()
    cols, rows = read_csv_rows(tmp / "r1/robustness.csv")
    assert {"n", "gap_s", "gap_x", "bound_s", "bound_x", "exceeded"} <= set(cols)
    assert len(rows) == 4


def test_robustness_unbounded(tmp_path):
    pmf = tmp_path / "skew.json"
    pmf.write_text(json.dumps({"pmf": [[0.495, 0.495], [0.005, 0.005]]}))
    assert main(["robustness", "--pmf", str(pmf), "--n", "100", "--trials", "2", "--out", str(tmp_path)]) == 0
    _, rows = read_csv_rows(tmp_path / "robustness.csv")
    assert rows[0]["bound_s"] == "unbounded"


def test_experiment_parity(tmp_path):
    assert main(["experiment", "parity", "--theta-grid", "0:1:5", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "parity_curve.csv").exists()


@pytest.mark.parametrize("argv", [[], ["bogus"], ["pic"], ["put-bounds", "--pmf", "x.json", "--bad-flag"]])
def test_usage_errors(argv):
    assert main(argv) == 1


def test_validation_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"pmf": [[0.5, 0.6], [0.0, 0.0]]}))
    assert main(["pic", "--pmf", str(bad)]) == 1
    assert main(["pic", "--pmf", str(tmp_path / "missing.json")]) == 1
