import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from rayleigh_disc.cli import SWEEP_COLUMNS, main, read_sweep_csv, sweep_values


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", "--a", "-1", "--n", "1", "--form", "eq2",
                       "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["class_tag"] == "A_NEG"
    assert rep["cycle"]["stability"] == "stable"
    assert rep["hypotheses"]["verdict"] == "at most one limit cycle, stable"
    # config echoed for reproducibility
    assert rep["config"]["a"] == -1 and rep["config"]["rtol"] == 1e-10


def test_analyze_center_text(capsys):
    code, out, _ = run(capsys, "analyze", "--a", "0", "--n", "1", "--format", "text")
    assert code == 0
    assert out.startswith("class: CENTER")
    assert "cycle: none" in out


def test_analyze_center_json(capsys):
    code, out, _ = run(capsys, "analyze", "--a", "0")
    rep = json.loads(out)
    assert rep["class_tag"] == "CENTER" and rep["cycle"] is None


def test_analyze_rejects_n0(capsys):
    code, _, err = run(capsys, "analyze", "--a", "1", "--n", "0")
    assert code == 2
    assert "n must be ≥ 1" in err


@pytest.mark.parametrize("argv", [
    ["analyze", "--a", "1", "--rtol", "1e-2"],
    ["analyze", "--a", "nan"],
    ["analyze"],
    ["frobnicate"],
    ["sweep", "--n", "1", "--a-steps", "1"],
    ["sweep", "--n", "1", "--a-min", "1", "--a-max", "0"],
    ["sweep", "--n", "1", "--a-min", "-inf"],
    ["sweep", "--n", "1", "--jobs", "0"],
    ["portrait", "--a", "1", "--size", "100"],
    ["verify", "--only", "11"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_sweep_requires_n(capsys):
    code, _, err = run(capsys, "sweep")
    assert code == 2 and "--n" in err


def test_analyze_out_file(tmp_path, capsys):
    target = tmp_path / "rep.json"
    code, out, _ = run(capsys, "analyze", "--a", "0.5", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["class_tag"] == "A_POS"


def test_sweep_values_symmetric():
    vals = sweep_values(-2, 2, 41)
    assert len(vals) == 41 and vals[20] == 0.0
    assert all(v == -w for v, w in zip(vals, reversed(vals)))


def test_small_sweep_csv(tmp_path, capsys):
    target = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--a-min", "-1", "--a-max", "1", "--a-steps", "3",
                     "--n", "1", "--n", "2", "--out", str(target))
    assert code == 0
    text = target.read_text()
    assert text.startswith("# ")
    header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
    assert header.split(",") == list(SWEEP_COLUMNS)
    rows = read_sweep_csv(text)
    assert [(float(r["a"]), int(r["n"])) for r in rows] == [
        (-1.0, 1), (0.0, 1), (1.0, 1), (-1.0, 2), (0.0, 2), (1.0, 2)]
    center = [r for r in rows if float(r["a"]) == 0]
    assert all(r["stability"] == "CENTER" and r["r_star"] == "" for r in center)
    for r in rows:
        if float(r["a"]) != 0:
            assert r["status"] == "ok"
            assert r["stability"] == ("stable" if float(r["a"]) < 0 else "unstable")


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--a-min", "0.5", "--a-max", "1", "--a-steps", "2",
                       "--n", "1", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["config"]["ns"] == [1]
    assert [r["a"] for r in obj["rows"]] == [0.5, 1.0]


@pytest.mark.slow
def test_full_sweep_rows_and_conjugacy(capsys):
    code, out, _ = run(capsys, "sweep", "--a-min", "-2", "--a-max", "2", "--a-steps", "41",
                       "--n", "1")
    assert code == 0
    rows = read_sweep_csv(out)
    assert len(rows) == 41
    with_cycle = [r for r in rows if r["r_star"]]
    assert len(with_cycle) == 40
    by_a = {float(r["a"]): float(r["r_star"]) for r in with_cycle}
    for a, r in by_a.items():
        assert math.isclose(r, by_a[-a], rel_tol=0.01)


def test_portrait_svg(tmp_path, capsys):
    target = tmp_path / "p.svg"
    code, _, _ = run(capsys, "portrait", "--a", "-1", "--size", "300", "--out", str(target))
    assert code == 0
    text = target.read_text()
    root = ET.fromstring(text)
    assert root.get("width") == "300"
    assert "config:" in text


def test_portrait_json(capsys):
    code, out, _ = run(capsys, "portrait", "--a", "0", "--format", "json")
    obj = json.loads(out)
    assert code == 0 and obj["class_tag"] == "CENTER"
    assert obj["config"]["format"] == "json"


def test_verify_subset_text(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1", "--only", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "PASS"
    assert lines[0].startswith("[PASS] criterion  1")


def test_verify_failure_exit_code(capsys):
    # the printed blow-up form carries a misprinted term, so criterion 2 fails
    code, out, _ = run(capsys, "verify", "--only", "2")
    assert code == 1
    assert out.strip().splitlines()[-1] == "FAIL: criteria 2"


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "--only", "8", "--only", "10", "--json")
    obj = json.loads(out)
    assert code == 0 and obj["passed"]
    assert [r["criterion"] for r in obj["results"]] == [8, 10]


@pytest.mark.slow
def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--json")
    obj = json.loads(out)
    failed = sorted(r["criterion"] for r in obj["results"] if not r["passed"])
    assert failed == [2]
    assert code == 1


def test_jobs_from_environment():
    env_code = ("import os; os.environ['RAYLEIGH_DISC_JOBS'] = '3';"
                "from rayleigh_disc.cli import build_parser;"
                "print(build_parser().parse_args(['verify']).jobs)")
    out = subprocess.run([sys.executable, "-c", env_code], capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "3"


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "rayleigh_disc", "analyze", "--a", "1",
                          "--n", "0"], capture_output=True, text=True)
    assert out.returncode == 2
