import contextlib
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from spherical_qmc.cli import main

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        rc = main(list(argv))
    return rc, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", ["main", "sample", "score", "bounds", "experiment", "report"])
def test_help_golden(name):
    rc, out, _ = run(*([] if name == "main" else [name]), "--help")
    assert rc == 0
    assert out == (GOLDEN / f"help_{name}.txt").read_text()


def test_missing_required_flag():
    rc, _, err = run("sample", "--kind", "iid-uniform")
    assert rc == 1
    assert "error[validation]" in err and "usage:" in err


def test_no_command():
    rc, _, err = run()
    assert rc == 1 and "usage:" in err


def test_bad_values():
    assert run("sample", "--kind", "iid-uniform", "--n", "0", "--out", "x")[0] == 1
    assert run("bounds", "--n", "1000")[0] == 1
    assert run("bounds", "--n", "1000", "--eta", "3", "--eps", "1")[0] == 1
    assert run("bounds", "--n", "1000", "--eta", "1")[0] == 1
    assert run("score", "--in", "/nonexistent.csv", "--metric", "wce")[0] == 1


def test_bounds_headline():
    rc, out, _ = run("bounds", "--n", "1000", "--eta", "3")
    assert rc == 0
    rep = json.loads(out)
    assert rep["wce_bound"] < 3e-3
    assert rep["failure_prob"] < 1e-3
    assert "failure_prob_alt" in rep and "lam_star" in rep


def test_bounds_concentration():
    rc, out, _ = run("bounds", "--n", "16", "--eps", "1", "--delta", "0.1")
    assert rc == 0
    assert 0 <= json.loads(out)["tail_bound"] <= 1
    assert run("bounds", "--n", "16", "--eps", "1", "--delta", "0.001")[0] == 1


def test_score_single_point(tmp_path):
    f = tmp_path / "one.csv"
    f.write_text("x,y,z\n0,0,1\n")
    rc, out, _ = run("score", "--in", str(f), "--metric", "wce", "--s", "2")
    assert rc == 0
    rec = json.loads(out)
    assert abs(rec["value"] - 1 / math.sqrt(4 * math.pi)) <= 1e-12
    assert rec["metric"] == "wce" and "tail_bound" in rec and "params" in rec


def test_score_validation(tmp_path):
    f = tmp_path / "one.csv"
    f.write_text("x,y,z\n0,0,1\n")
    assert run("score", "--in", str(f), "--metric", "gt", "--s", "2")[0] == 1
    assert run("score", "--in", str(f), "--metric", "gensum")[0] == 1
    assert run("score", "--in", str(f), "--metric", "wce", "--s", "0.5")[0] == 1
    f.write_text("x,y\n0,0\n")
    assert run("score", "--in", str(f), "--metric", "wce")[0] == 1


def test_runtime_error_exit_code(tmp_path):
    f = tmp_path / "close.csv"
    f.write_text(f"x,y,z\n0,0,1\n1e-5,0,{math.sqrt(1 - 1e-10)!r}\n")
    rc, _, err = run("score", "--in", str(f), "--metric", "wce-heat")
    assert rc == 2 and "error[runtime]" in err


def test_sample_score_experiment_report(tmp_path):
    rc, _, _ = run("sample", "--kind", "spherical-eig", "--n", "6", "--replicas", "2", "--seed", "3",
                   "--out", str(tmp_path / "s"))
    assert rc == 0
    man = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert man["files"] == ["replica_00000.csv", "replica_00001.csv"]
    pts = np.loadtxt(tmp_path / "s" / "replica_00001.csv", delimiter=",", skiprows=1)
    assert pts.shape == (6, 3) and np.allclose(np.linalg.norm(pts, axis=1), 1)

    plan = {"version": 1, "sampler": {"kind": "iid-uniform"}, "n_values": [5, 10], "replicas": 3,
            "seed": 1, "metrics": [{"metric": "wce", "s": 2}, {"metric": "energy"}]}
    pf = tmp_path / "plan.json"
    pf.write_text(json.dumps(plan))
    rc, out, _ = run("experiment", "--plan", str(pf), "--out", str(tmp_path / "e"))
    assert rc == 0 and json.loads(out)["records"] == 6
    summary = json.loads((tmp_path / "e" / "summary.json").read_text())
    assert len(summary["cells"]) == 4
    rc, out, _ = run("report", "--in", str(tmp_path / "e" / "records.csv"), "--out", str(tmp_path / "r.tsv"))
    assert rc == 0 and "median" in out
    lines = (tmp_path / "r.tsv").read_text().splitlines()
    assert lines[0].startswith("kind\tn\tmedian") and len(lines) == 3


def test_bad_plan(tmp_path):
    pf = tmp_path / "plan.json"
    pf.write_text(json.dumps({"version": 9}))
    rc, _, err = run("experiment", "--plan", str(pf), "--out", str(tmp_path))
    assert rc == 1 and "version" in err


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "spherical_qmc.cli", "bounds", "--n", "1000", "--eta", "3"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["failure_prob"] < 1e-3
