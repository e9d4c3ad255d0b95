import json
import os
import subprocess
import sys

PKG = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "jetcalc.cli", *args],
                          capture_output=True, text=True, env=env,
                          timeout=600)


def test_tensor_laws_exit_zero_and_row_count(tmp_path):
    out = tmp_path / "r.json"
    res = run_cli("verify", "tensor-laws", "--seed", "7",
                  "--out", str(out))
    assert res.returncode == 0, res.stderr
    rep = json.loads(out.read_text())
    assert rep["summary"]["failed"] == 0
    assert 550 <= rep["summary"]["total"] <= 900
    assert rep["tool"]["name"] == "jetcalc"


def test_json_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        res = run_cli("verify", "jets", "--seed", "11", "--out", str(path))
        assert res.returncode == 0, res.stderr
    assert a.read_bytes() == b.read_bytes()


def test_json_reload_and_reemit_identical(tmp_path):
    out = tmp_path / "r.json"
    run_cli("verify", "jets", "--seed", "3", "--out", str(out))
    from jetcalc.reporting import report_json
    rep = json.loads(out.read_text())
    assert report_json(rep) == out.read_text()


def test_csv_row_count_matches(tmp_path):
    j, c = tmp_path / "r.json", tmp_path / "r.csv"
    run_cli("verify", "jets", "--seed", "3", "--out", str(j))
    run_cli("verify", "jets", "--seed", "3", "--format", "csv",
            "--out", str(c))
    rep = json.loads(j.read_text())
    lines = c.read_text().strip().splitlines()
    assert len(lines) - 1 == rep["summary"]["total"]


def test_malformed_scenario_exits_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ this is not json")
    res = run_cli("verify", "recursions", "--scenario", str(bad))
    assert res.returncode == 2
    assert "configuration error" in res.stderr


def test_invalid_scenario_fields_exit_two(tmp_path):
    bad = tmp_path / "bad2.json"
    bad.write_text(json.dumps({"name": "x", "n": 2, "k": 1,
                               "metric": [["1", "0"], ["0", "1"]],
                               "fibre_metric": [["1"]],
                               "base_points": [[0.0]],  # wrong dimension
                               "degree": 4}))
    res = run_cli("verify", "recursions", "--scenario", str(bad))
    assert res.returncode == 2


def test_unknown_suite_exits_two():
    res = run_cli("verify", "nonsense")
    assert res.returncode == 2


def test_threshold_override_can_fail_a_run():
    res = run_cli("verify", "jets", "--threshold",
                  "jets/factorial-norm=-1.0")
    assert res.returncode == 1
    assert "FAILED" in res.stderr


def test_custom_flat_scenario_recursions(tmp_path):
    scn = {
        "name": "customflat", "n": 1, "k": 1,
        "metric": [["1"]], "fibre_metric": [["1"]],
        "connection": None,
        "base_points": [[0.1]], "fibre_points": [[0.8]],
        "degree": 5, "seed": 5,
    }
    p = tmp_path / "flat.json"
    p.write_text(json.dumps(scn))
    out = tmp_path / "rep.json"
    res = run_cli("verify", "recursions", "--family", "P", "--max-order",
                  "3", "--scenario", str(p), "--out", str(out))
    assert res.returncode == 0, res.stderr
    rep = json.loads(out.read_text())
    assert all(r["passed"] for r in rep["rows"])
    # the flat threshold applies
    assert all(float(r["threshold"]) <= 1e-11 for r in rep["rows"])


def test_fit_growth_runs():
    res = run_cli("fit", "growth", "--family", "P", "--max-order", "3",
                  "--scenario", "conformal-base")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["coverage"] == 1.0


def test_threads_env_accepted(tmp_path):
    out = tmp_path / "r.json"
    res = run_cli("verify", "jets", "--out", str(out),
                  env_extra={"JETCALC_THREADS": "2"})
    assert res.returncode == 0
