import json
import os
import subprocess
import sys

import pytest

from rsk.cli import main


def run_json(argv, tmp_path, name="r.json"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def entries(report, check):
    return [e for e in report["entries"] if e["check"] == check]


def test_odd_m_is_a_config_error(capsys):
    assert main(["verify", "maps", "--m", "3"]) == 2
    assert "m must be even" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["verify", "geometry", "--samples", "50"],
    ["verify", "geometry", "--grid", "2"],
    ["invariant", "--k-max", "-1"],
])
def test_invalid_config_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "config error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["verify", "geometry", "--tol", "oops"],
    ["verify", "geometry", "--tol", "fd=abc"],
    ["verify", "nope"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_unknown_tolerance_name(capsys):
    assert main(["verify", "geometry", "--tol", "bogus=1"]) == 2


def test_charclass_report(tmp_path):
    code, rep = run_json(["verify", "charclass"], tmp_path)
    assert code == 0 and rep["pass"] and rep["schema"] == 1
    w3 = entries(rep, "w3_obstruction")[0]["value"]
    assert w3["w3_mapping_torus"] == "a^2 b"
    assert w3["w3_identity"] == 0


def test_retraction_deterministic(tmp_path):
    argv = ["verify", "retraction", "--samples", "500", "--seed", "7"]
    c1, _ = run_json(argv, tmp_path, "a.json")
    c2, _ = run_json(argv, tmp_path, "b.json")
    assert c1 == c2 == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_seed_changes_report(tmp_path):
    _, r1 = run_json(["verify", "geometry", "--seed", "1", "--samples", "200"], tmp_path, "a.json")
    _, r2 = run_json(["verify", "geometry", "--seed", "2", "--samples", "200"], tmp_path, "b.json")
    assert r1["seed"] == 1 and r2["seed"] == 2
    assert r1["entries"] != r2["entries"]


def test_tolerance_override_can_fail_a_check(tmp_path, capsys):
    code, rep = run_json(["verify", "geometry", "--samples", "200", "--tol", "differential=1e-30"], tmp_path)
    assert code == 1 and not rep["pass"]
    assert rep["config"]["tolerances"]["differential"] == 1e-30
    assert "FAIL geometry" in capsys.readouterr().err


def test_markdown_format(capsys):
    assert main(["verify", "charclass", "--format", "md"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# rsk report: charclass")
    assert "| module | check | params | samples | max residual / value | pass |" in out
    assert "overall: PASS" in out


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RSK_SEED", "42")
    _, rep = run_json(["verify", "charclass"], tmp_path)
    assert rep["seed"] == 42
    _, rep = run_json(["verify", "charclass", "--seed", "3"], tmp_path)
    assert rep["seed"] == 3


def test_bad_seed_in_environment(monkeypatch, capsys):
    monkeypatch.setenv("RSK_SEED", "x")
    assert main(["verify", "charclass"]) == 2


def test_invariant_subcommand(tmp_path):
    code, rep = run_json(["invariant", "--m", "4", "--k-max", "3"], tmp_path)
    assert code == 0
    classes = {e["params"]["k"]: e["value"] for e in entries(rep, "pushed_class")}
    assert classes == {k: [4 * k, 1] for k in range(4)}


def test_dump_curves(tmp_path):
    d = tmp_path / "curves"
    code, _ = run_json(["invariant", "--k-max", "2", "--dump-curves", str(d)], tmp_path)
    assert code == 0
    names = sorted(p.name for p in d.iterdir())
    assert names == [f"gamma_A_m2_k{k}.csv" for k in range(3)]
    assert (d / "gamma_A_m2_k1.csv").read_text().splitlines()[0] == "t,alpha,beta"


def test_module_entry_point():
    env = dict(os.environ, RSK_NUMBA="0")
    out = subprocess.run([sys.executable, "-m", "rsk", "verify", "charclass", "--seed", "5"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 0, out.stderr
    rep = json.loads(out.stdout)
    assert rep["seed"] == 5 and rep["config"]["backend"] == "numpy"
