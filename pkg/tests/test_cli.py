import json

import numpy as np
import pytest

from conedefense import cli, model_io

FOUR = "builtin:example7_1"
X0 = "12.5822,10.0375,13.4447,14.7301"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_zeros(capsys):
    code, out, _ = run(capsys, "zeros", "--system", FOUR)
    assert code == 0 and out.strip() == "-1.25"
    code, data = run_json(capsys, "zeros", "--system", FOUR)
    np.testing.assert_allclose(data["zeros"], [[-1.25, 0.0]], atol=1e-9)


def test_global_flags_after_subcommand(capsys):
    code, out, _ = run(capsys, "zeros", "--system", FOUR, "--json")
    assert code == 0 and "zeros" in json.loads(out)


def test_classify(capsys):
    code, data = run_json(capsys, "classify", "--system", FOUR)
    assert code == 0
    assert data["cross_positive"]["verdict"] == "yes" and data["hurwitz"]
    assert data["cone_invariant"]["verdict"] == "no"
    # negative diagonal: not cone invariant, so requiring it fails
    code, _ = run_json(capsys, "classify", "--system", FOUR, "--require", "cone_invariant")
    assert code == 2
    code, _ = run_json(capsys, "classify", "--system", FOUR, "--require", "cross_positive")
    assert code == 0


def test_attack_verify_simulate(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    code, data = run_json(capsys, "attack", "--system", FOUR, "--zero", "-1.25",
                          "--x0", X0, "--cone-feasible", "--out", str(plan))
    assert code == 0 and data["cone_feasible"] and data["d0"][0][0] < 0
    code, data = run_json(capsys, "verify", "--system", FOUR, "--attack", str(plan))
    assert code == 0 and data["gap"] <= 1e-6 and data["undetectable"]
    csv = tmp_path / "t.csv"
    code, _, _ = run(capsys, "simulate", "--system", FOUR, "--attack", str(plan),
                     "--out", str(csv), "--t-end", "1", "--dt", "0.01")
    assert code == 0 and len(csv.read_text().splitlines()) == 102
    code, _, _ = run(capsys, "simulate", "--system", FOUR, "--attack", str(plan), "--spoofed",
                     "--out", str(csv), "--t-end", "1", "--dt", "0.01")
    assert code == 0 and csv.read_text().splitlines()[1].endswith("spoofed")


def test_attack_by_index(capsys):
    code, data = run_json(capsys, "attack", "--system", FOUR, "--zero", "0")
    assert code == 0 and data["s0"] == pytest.approx([-1.25, 0.0])
    code, _, err = run(capsys, "attack", "--system", FOUR, "--zero", "3")
    assert code == 1 and "only 1 zeros" in err


def test_attack_without_zeros(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"schema_version": 1, "A": [[-1.0]], "b_index": [1],
                             "c_index": [1]}))
    code, _, _ = run(capsys, "attack", "--system", str(p))
    assert code == 2


def test_defend(capsys):
    code, data = run_json(capsys, "defend", "--system", FOUR)
    assert code == 0 and data["status"] == "SUCCESSFUL"
    code, data = run_json(capsys, "defend", "--system", FOUR, "--cone", "--exhaustive")
    rep = data["reports"][0]
    assert code == 0 and rep["sensor_set"] == [1, 2, 3, 4] and rep["discrepancies"] == []


def test_mas(capsys):
    code, out, _ = run(capsys, "mas", "--graph", "builtin:eq5_1_graph", "--exhaustive")
    assert code == 0 and out.startswith("components {1,2,3} {4,5,6}")
    code, _, err = run(capsys, "mas", "--graph", "builtin:eq5_1_graph", "--order", "2")
    assert code == 1 and "strongly connected" in err
    code, data = run_json(capsys, "mas", "--graph", "builtin:swing9_graph", "--order", "2",
                          "--gains", "1.5")
    assert code == 0 and data["reports"][0]["claim"] == "SUCCESSFUL"
    code, data = run_json(capsys, "mas", "--graph", "builtin:swing9_graph", "--order", "2",
                          "--r", "0.5")
    assert [r["claim"] for r in data["reports"]] == ["ALMOST_SUCCESSFUL", "SUCCESSFUL"]


def test_errors_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "zeros", "--system", str(tmp_path / "missing.json"))
    assert code == 1 and err.startswith("error:")
    code, _, err = run(capsys, "attack", "--system", FOUR, "--x0", "1,2")
    assert code == 1 and "--x0" in err
    with pytest.raises(SystemExit):
        cli.main(["bogus"])


def test_simulate_requires_state(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--system", FOUR, "--out", str(tmp_path / "x.csv"))
    assert code == 1 and "--x0" in err


def test_plan_file_is_schema_valid(capsys, tmp_path):
    plan = tmp_path / "plan.json"
    run(capsys, "attack", "--system", FOUR, "--out", str(plan))
    model_io.load_plan(plan)
