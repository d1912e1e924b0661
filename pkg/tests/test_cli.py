import csv
import io
import json
from pathlib import Path

import pytest

from wariness.cli import fmt, main, parse_config
from wariness.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def cfg(name):
    return str(CONFIGS / f"{name}.json")


def write_cfg(tmp_path, doc, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


BASE = {"n": 1.1, "beta": 0.7, "gamma": "inf",
        "production": {"A": 3.6, "a": 0.3, "rho": -0.6}}


def test_fmt_rules():
    assert fmt(None) == "NA" and fmt(float("nan")) == "NA"
    assert fmt(True) == "true" and fmt(float("inf")) == "inf"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(3) == "3"


def test_step_example(capsys):
    code, out, err = run(capsys, "step", "--config", cfg("example1"), "--k0", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3 and {r["regime"] for r in rows} == {"3"}
    assert "3 solution(s)" in err


def test_step_json(capsys):
    code, out, _ = run(capsys, "step", "--config", cfg("example2"), "--k0", "1.5",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["count"] == 3
    assert [s["regime"] for s in doc["solutions"]] == [2, 3, 1]


def test_simulate_layout(capsys):
    code, out, _ = run(capsys, "simulate", "--config", cfg("max_min_A3.6"), "--k0", "0.5,1.0")
    assert code == 0
    traj, summary = out.split("\n\n")
    assert traj.splitlines()[0] == "k0,t,k,regime"
    rows = list(csv.DictReader(io.StringIO(summary)))
    assert [r["limit"] for r in rows] == ["collapse", "converges"]
    assert rows[0]["k_star"] == "NA"
    assert float(rows[1]["k_star"]) == pytest.approx(2.26776, abs=5e-4)


def test_simulate_policies(capsys):
    lo = run(capsys, "simulate", "--config", cfg("example1"), "--k0", "1",
             "--policy", "lowest")[1].split("\n\n")[1]
    hi = run(capsys, "simulate", "--config", cfg("example1"), "--k0", "1",
             "--policy", "stay:highest")[1].split("\n\n")[1]
    assert "collapse" in lo and "converges" in hi and "stay:highest" in hi


def test_trap_json_and_csv(capsys):
    code, out, _ = run(capsys, "trap", "--config", cfg("max_min_A3.6"))
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "trap"
    assert all(v["ok"] for v in doc["verification"])
    code, out, _ = run(capsys, "trap", "--config", cfg("intermediate"), "--format", "csv")
    rows = {r["item"]: r for r in csv.DictReader(io.StringIO(out))}
    assert code == 0
    for key in ("x_poverty_A", "x_poverty_B"):
        assert "reference=0.0887" in rows[key]["note"]
        assert rows[key]["note"].endswith(("agree", "disagree"))
    assert "threshold.x_beta1" in rows


def test_check(capsys):
    code, out, _ = run(capsys, "check", "--config", cfg("max_min_A2"))
    rows = {r["check"]: r for r in csv.DictReader(io.StringIO(out))}
    assert code == 0
    assert rows["collapse"]["result"] == "true" and "case=4" in rows["collapse"]["detail"]
    assert rows["regime_lock"]["result"] == "LockedRegime3"


def test_sweep_with_missing_points(capsys):
    code, out, _ = run(capsys, "sweep", "--config", cfg("no_wariness_a065"), "--param", "rho",
                       "--from", "-2", "--to", "-0.5", "--steps", "4", "--target", "x1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    assert rows[0]["status"] == "ok" and rows[-1]["status"] == "missing"
    assert rows[-1]["x1"] == "NA" and "absent" in rows[-1]["note"]


def test_output_is_deterministic(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.csv"
        assert main(["simulate", "--config", cfg("example2"), "--k0", "0.3,1.5,4",
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    man = json.loads((tmp_path / "o0.csv.manifest.json").read_text())
    assert man["command"] == "simulate" and man["config"]["gamma"] == 0.255
    assert man["solver"]["grid_points"] == 4096 and "version" in man


def test_manifest_to_stderr(capsys):
    _, out, err = run(capsys, "check", "--config", cfg("example1"))
    assert '"command": "check"' in err and "command" not in out


@pytest.mark.parametrize("doc,path", [
    ({**BASE, "production": {"A": 3.6, "a": 0.3, "rho": "x"}}, "production.rho"),
    ({**BASE, "production": {"A": 3.6, "a": 0.3}}, "production.rho"),
    ({**BASE, "solver": {"foo": 1}}, "solver.foo"),
    ({**BASE, "extra": 1}, "extra"),
    ({**BASE, "solver": {"grid_points": 10.5}}, "solver.grid_points"),
    ({**BASE, "production": {"A": 3.6, "a": 1.3, "rho": -0.6}}, "production"),
    ({**BASE, "utility": "crra"}, "utility"),
])
def test_config_errors_name_the_field(capsys, tmp_path, doc, path):
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.path == path
    code, _, err = run(capsys, "check", "--config", write_cfg(tmp_path, doc))
    assert code == 2 and path in err


def test_unreadable_and_malformed_config(capsys, tmp_path):
    assert run(capsys, "check", "--config", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{\"n\": 1.1,,}")
    code, _, err = run(capsys, "check", "--config", str(bad))
    assert code == 2 and "bad.json:1:" in err


def test_missing_k0_is_config_error(capsys):
    assert run(capsys, "step", "--config", cfg("example1"))[0] == 2


def test_sweep_argument_errors(capsys):
    assert run(capsys, "sweep", "--config", cfg("example1"), "--param", "zzz", "--from", "1",
               "--to", "2", "--steps", "3", "--target", "x1")[0] == 2
    assert run(capsys, "sweep", "--config", cfg("example1"), "--param", "A", "--from", "1",
               "--to", "2", "--steps", "3", "--target", "nope")[0] == 2


def test_no_step_exits_one(capsys, tmp_path):
    doc = {**BASE, "solver": {"k_min": 0.9, "k_max": 1.32}}
    code, out, _ = run(capsys, "simulate", "--config", write_cfg(tmp_path, doc), "--k0", "1")
    assert code == 1 and "no_step" in out.split("\n\n")[1]


def test_numerical_failure_exits_one(capsys, tmp_path):
    # x_star of H is undefined for rho > 0.
    doc = {**BASE, "production": {"A": 2.0, "a": 0.4, "rho": 0.5}}
    code, _, err = run(capsys, "sweep", "--config", write_cfg(tmp_path, doc), "--param", "A",
                       "--from", "1", "--to", "2", "--steps", "2", "--target", "x_star")
    assert code == 0  # per-point failures become notes, not aborts
    code, _, err = run(capsys, "trap", "--config", write_cfg(tmp_path, doc))
    assert code == 1 and "numerical failure" in err


def test_check_high_productivity(capsys):
    _, out, _ = run(capsys, "check", "--config", cfg("max_min_A3.6"))
    rows = {r["check"]: r["result"] for r in csv.DictReader(io.StringIO(out))}
    assert rows["regime_lock"] == "LockedRegime3"
    assert rows["h_increasing"] == "true" and rows["collapse"] == "false"


def test_no_wariness_config(capsys):
    _, out, _ = run(capsys, "check", "--config", cfg("no_wariness_a035"))
    assert "degenerate_band=true" in out
    code, out, _ = run(capsys, "step", "--config", cfg("no_wariness_a035"), "--k0", "1")
    assert code == 0 and len(out.strip().splitlines()) == 2


def test_sweep_through_collapse_boundary(capsys):
    code, out, _ = run(capsys, "sweep", "--config", cfg("max_min_A3.6"), "--param", "A",
                       "--from", "2", "--to", "3.6", "--steps", "17",
                       "--target", "k_bar1,k_bar2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 17
    assert rows[0]["status"] == "missing" and rows[0]["k_bar1"] == "NA"
    assert rows[-1]["status"] == "ok"
    assert float(rows[-1]["k_bar1"]) == pytest.approx(0.5644, abs=5e-4)
    # The pair closes up as A falls toward the boundary.
    gaps = [float(r["k_bar2"]) - float(r["k_bar1"]) for r in rows if r["status"] == "ok"]
    assert all(g0 < g1 for g0, g1 in zip(gaps, gaps[1:]))
