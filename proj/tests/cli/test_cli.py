import json
import os
import subprocess

import pytest

CLI = os.environ.get("DPHT_CLI", "dpht")


def run(*args, stdin=None, env=None):
    full_env = dict(os.environ)
    full_env.pop("DPHT_SEED", None)
    if env:
        full_env.update(env)
    return subprocess.run([CLI, *args], input=stdin, capture_output=True, text=True, env=full_env)


def ok(*args, **kw):
    proc = run(*args, **kw)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_privatize_then_test_round_trip(tmp_path):
    noisy = tmp_path / "noisy.json"
    ok("--seed", "3", "--out", str(noisy), "privatize", "fixture:election", "--epsilon", "0.2")
    doc = json.loads(noisy.read_text())
    assert doc["kind"] == "noisy"
    assert doc["n0"] == 1000
    assert doc["provenance"]["scale"] == pytest.approx(10.0)
    result = json.loads(ok("--seed", "4", "test", "independence", str(noisy), "--m", "2000"))
    assert 0.0 <= result["p"] <= 1.0
    assert result["m"] == 2000
    assert result["inputs"][0]["seed"] == 3


def test_privatize_infinite_epsilon_is_identity():
    doc = json.loads(ok("--seed", "1", "privatize", "fixture:election", "--epsilon", "inf"))
    assert doc["values"] == [[238, 262], [265, 235]]


def test_exact_election_pvalue():
    result = json.loads(ok("--seed", "1", "test", "independence", "fixture:election", "--epsilon", "inf",
                           "--stat", "lr", "--m", "100000"))
    assert result["t_star"] == pytest.approx(2.9175, abs=1e-4)
    assert abs(result["p"] - 0.0876) < 0.01


def test_csv_from_stdin():
    out = ok("--seed", "1", "privatize", "-", "--epsilon", "1", stdin="10,20\n30,40\n")
    assert json.loads(out)["n0"] == 100


def test_proportions_identical_tables(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("200,300,500\n")
    result = json.loads(ok("--seed", "2", "test", "proportions", str(t), str(t), "--epsilon", "inf", "--m", "2000"))
    assert result["p"] > 0.99


def test_gof_with_theta(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("250,250,500\n")
    result = json.loads(ok("--seed", "2", "test", "gof", str(t), "--epsilon", "inf", "--theta", "0.25,0.25,0.5",
                           "--m", "1000"))
    assert result["p"] > 0.9


@pytest.mark.parametrize("args", [
    ["test", "gof", "fixture:election", "--epsilon", "inf"],
    ["privatize", "fixture:election", "--epsilon", "-1"],
    ["test", "independence", "fixture:election"],
    ["privatize", "fixture:election"],
    ["bogus"],
])
def test_usage_errors_exit_2(args):
    assert run("--seed", "1", *args).returncode == 2


def test_data_error_exit_3(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert run("--seed", "1", "privatize", str(bad), "--epsilon", "1").returncode == 3
    assert run("--seed", "1", "privatize", "fixture:czech", "--epsilon", "1").returncode == 3


def test_degenerate_exit_4(tmp_path):
    noisy = {
        "kind": "noisy", "rows": 2, "cols": 2, "values": [[-50.0, -60.0], [-70.0, -80.0]], "n0": 10,
        "provenance": {"family": "laplace", "scale": 2.0, "epsilon": 1.0, "sensitivity": 2.0, "pure_dp": True,
                       "seed": 1, "mode": "standard"},
    }
    path = tmp_path / "n.json"
    path.write_text(json.dumps(noisy))
    assert run("--seed", "1", "test", "independence", str(path)).returncode == 4


def test_brute_force_too_large_exit_5():
    assert run("sensitivity", "--margins", "5000,5000;3000,3000,4000", "--stat", "chi2").returncode == 5


def test_sensitivity_reports():
    rep = json.loads(ok("sensitivity", "--margins", "500,500;503,497", "--stat", "chi2", "--brute-force"))
    assert rep["s_h"] == pytest.approx(7.936285706285426, rel=1e-12)
    assert abs(rep["s_h"] - rep["brute_force"]) < 1e-9
    diff = json.loads(ok("sensitivity", "fixture:nyc_taxi", "--stat", "diff"))
    assert diff["s_h"] == 4
    proc = run("sensitivity", "--margins", "3,3;2,2,2", "--stat", "ll")
    assert proc.returncode == 0
    assert "brute" in proc.stderr.lower()
    assert "brute_force_fallback" in json.loads(proc.stdout)["flags"]


def test_testbed_output_mode():
    result = json.loads(ok("--seed", "5", "testbed", "fixture:election", "--stat", "diff", "--mode", "output",
                           "--epsilon", "1", "--m", "500"))
    assert result["m"] == 500
    assert 0.0 <= result["p"] <= 1.0


def test_reliability_csv_and_summary(tmp_path):
    summary = tmp_path / "s.json"
    out = ok("--seed", "6", "--format", "csv", "reliability", "--epsilon", "0.2,inf", "--trials", "50", "--m", "100",
             "--summary", str(summary))
    lines = out.strip().splitlines()
    assert lines[0].startswith("trial,p_value,uniform_quantile")
    assert len(lines) == 1 + 100
    assert len(json.loads(summary.read_text())["series"]) == 2


def test_agreement_csv():
    out = ok("--seed", "7", "--format", "csv", "agreement", "fixture:election", "--epsilon", "inf", "--repeats", "3", "--m", "500")
    lines = out.strip().splitlines()
    assert lines[0] == "epsilon,statistic,mean_p,p10,p90,nonprivate_p"
    fields = lines[1].split(",")
    assert fields[2] == fields[5]


def test_fixture_command():
    assert json.loads(ok("fixture", "election"))["counts"] == [[238, 262], [265, 235]]


def test_seed_fallbacks():
    a = ok("privatize", "fixture:election", "--epsilon", "1", env={"DPHT_SEED": "9"})
    b = ok("--seed", "9", "privatize", "fixture:election", "--epsilon", "1")
    assert a == b
    proc = run("privatize", "fixture:election", "--epsilon", "1")
    assert proc.returncode == 0
    assert "seed" in proc.stderr


def test_config_is_echoed():
    proc = run("--seed", "11", "privatize", "fixture:election", "--epsilon", "1")
    assert "dpht config:" in proc.stderr
    assert "11" in proc.stderr


@pytest.mark.parametrize("cmd", [
    ["privatize", "fixture:election", "--epsilon", "0.2"],
    ["test", "independence", "fixture:nyc_taxi", "--epsilon", "inf", "--m", "3000"],
    ["reliability", "--epsilon", "0.5", "--trials", "40", "--m", "100"],
    ["testbed", "fixture:election", "--epsilon", "0.5", "--stat", "lr", "--m", "800"],
    ["agreement", "fixture:election", "--epsilon", "0.3", "--repeats", "4", "--m", "300"],
])
def test_output_independent_of_threads(cmd):
    base = ok("--seed", "12", "--threads", "1", *cmd)
    assert base == ok("--seed", "12", "--threads", "1", *cmd)
    assert base == ok("--seed", "12", "--threads", "3", *cmd)
