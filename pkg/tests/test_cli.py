import json
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from mmot.cli import main
from mmot.extremal import phi_n
from mmot.measures import QuantizedMeasure
from mmot.monge import MongeState, monge_to_sae

EXAMPLE1 = str(resources.files("mmot").joinpath("data", "example1.json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


def test_solve_example1(capsys, validate):
    code, out, err = run(capsys, "solve", EXAMPLE1)
    assert code == 0
    assert out["cost"] == pytest.approx(11 / 16, abs=1e-12)
    assert len(out["support"]) == 2
    assert "cost" in err
    validate("solve_report", out)


@pytest.mark.parametrize("method", ["oracle", "colgen"])
def test_solve_methods_agree(capsys, validate, method):
    code, out, _ = run(capsys, "solve", EXAMPLE1, "--method", method)
    assert code == 0 and out["cost"] == pytest.approx(11 / 16, abs=1e-7)
    validate("solve_report", out)


def test_solve_monge_is_larger(capsys, validate):
    code, out, _ = run(capsys, "solve", EXAMPLE1, "--method", "monge")
    assert code == 0 and out["cost"] > 11 / 16 + 1e-9
    validate("solve_report", out)


def test_solve_exact_and_local_search(capsys, validate):
    code, out, _ = run(capsys, "solve", EXAMPLE1, "--exact")
    assert code == 0 and out["cost_exact"] == "11/16" and out["margins"]["unique"] is True
    validate("solve_report", out)
    code, out, _ = run(capsys, "solve", EXAMPLE1, "--method", "colgen", "--pricing", "local-search", "--seed", "4")
    assert code == 0 and out["cost"] <= 11 / 16 + 1e-8
    validate("solve_report", out)


def test_solve_is_deterministic(capsys):
    _, a, _ = run(capsys, "solve", EXAMPLE1, "--method", "colgen", "--pricing", "local-search", "--seed", "2")
    _, b, _ = run(capsys, "solve", EXAMPLE1, "--method", "colgen", "--pricing", "local-search", "--seed", "2")
    a["stats"].pop("wall_time"), b["stats"].pop("wall_time")
    assert a == b


def test_solve_cost_file_and_inline(tmp_path, capsys, validate):
    write(tmp_path, "cost.json", {"type": "pairwise", "matrix": [[0, 1], [1, 0]]})
    prob = {"state_space": {"l": 2}, "marginal": [0.5, 0.5], "N": 2, "cost": {"file": "cost.json"}}
    validate("problem", prob)
    code, out, _ = run(capsys, "solve", write(tmp_path, "p.json", prob))
    assert code == 0 and out["cost"] == pytest.approx(0.0)
    prob["cost"] = {"type": "discrete_metric"}
    prob["marginal"] = {"exact": ["1/2", "1/2"]}
    code, out, _ = run(capsys, "solve", write(tmp_path, "q.json", prob), "--exact")
    assert code == 0 and out["cost_exact"] == "0"


def test_solve_infinite_and_capacity(tmp_path, capsys, validate):
    prob = {"state_space": {"l": 3, "points": [[0], [1], [2]]}, "N": 4, "cost": {"type": "coulomb"}}
    code, out, err = run(capsys, "solve", write(tmp_path, "p.json", prob))
    assert code == 2 and out["status"] == "infinite" and out["cost"] == "inf"
    validate("solve_report", out)
    prob["N"] = 12
    code, _, err = run(capsys, "solve", write(tmp_path, "q.json", prob), "--method", "oracle", "--limit-oracle", "1000")
    assert code == 2 and "exceed" in err
    code, _, _ = run(capsys, "solve", write(tmp_path, "r.json", prob), "--limit-columns", "10")
    assert code == 2


@pytest.mark.parametrize(
    "payload",
    [
        "{broken",
        json.dumps({"state_space": {"l": 2}, "N": 2}),
        json.dumps({"state_space": {"l": 2}, "N": 2, "cost": {"type": "pairwise", "matrix": [[0, 1], [2, 0]]}}),
        json.dumps({"state_space": {"l": 2}, "N": 2, "marginal": [0.7, 0.7], "cost": {"type": "discrete_metric"}}),
        json.dumps({"state_space": {"l": 3}, "N": 2, "cost": {"type": "discrete_metric"}, "marginal": [0.5, 0.5]}),
        json.dumps({"state_space": {"l": 2}, "N": 2, "cost": {"type": "spring", "r0": 1}}),
        json.dumps({"state_space": {"l": 2}, "N": 2, "cost": {"type": "discrete_metric"}, "options": {"speed": 9}}),
        json.dumps({"state_space": {"l": 2}, "N": "two", "cost": {"type": "discrete_metric"}}),
    ],
)
def test_solve_input_errors(tmp_path, capsys, payload):
    p = tmp_path / "bad.json"
    p.write_text(payload)
    code, out, err = run(capsys, "solve", str(p))
    assert code == 1 and out is None and err.startswith("error")


def test_solve_missing_file(capsys):
    assert run(capsys, "solve", "/nonexistent/problem.json")[0] == 1


def test_monge_rejects_nonuniform(tmp_path, capsys):
    prob = {"state_space": {"l": 2}, "marginal": [0.25, 0.75], "N": 2, "cost": {"type": "discrete_metric"}}
    assert run(capsys, "solve", write(tmp_path, "p.json", prob), "--method", "monge")[0] == 1


@pytest.mark.parametrize("l,N,count", [(3, 10, 66), (1, 7, 1), (2, 3, 4)])
def test_enumerate(capsys, validate, l, N, count):
    code, out, _ = run(capsys, "enumerate", str(l), str(N))
    assert code == 0 and out["count"] == count == len(out["measures"])
    validate("catalog", out)


def test_enumerate_with_phi(capsys, validate):
    code, out, _ = run(capsys, "enumerate", "2", "3", "--with-phi")
    assert [m["rho"] for m in out["measures"]] == [[3, 0], [2, 1], [1, 2], [0, 3]]
    assert np.allclose(out["measures"][1]["phi"], [[1 / 3, 1 / 3], [1 / 3, 0]])
    validate("catalog", out)
    assert run(capsys, "enumerate", "30", "30", "--limit-columns", "100")[0] == 2


def test_check_representable(tmp_path, capsys, validate):
    good = write(tmp_path, "good.json", {"matrix": phi_n(QuantizedMeasure(3, (2, 1)), 3).tolist()})
    code, out, _ = run(capsys, "check-representable", good, "3")
    assert code == 0 and out["verdict"] == "representable"
    validate("certificate", out)
    anti = write(tmp_path, "anti.json", {"matrix": [[0, 0.5], [0.5, 0]]})
    code, out, _ = run(capsys, "check-representable", anti, "3")
    assert code == 3 and out["verdict"] == "not-representable" and out["margin"] > 0
    validate("certificate", out)
    bad = write(tmp_path, "bad.json", {"matrix": [[0, 0.6], [0.4, 0]]})
    assert run(capsys, "check-representable", bad, "3")[0] == 1
    assert run(capsys, "check-representable", write(tmp_path, "x.json", [1, 2]), "3")[0] == 1


def test_decompose_monge(tmp_path, capsys, validate):
    m = MongeState(((0, 1, 2), (2, 0, 1), (1, 2, 0)))
    good = write(tmp_path, "s.json", monge_to_sae(m).to_dict())
    code, out, _ = run(capsys, "decompose-monge", good)
    assert code == 0 and len(out["maps"]) == 3
    assert MongeState.from_list(out["maps"]).plan() == m.plan()
    validate("monge_decomposition", out)

    _, rep, _ = run(capsys, "solve", EXAMPLE1)
    code, out, err = run(capsys, "decompose-monge", write(tmp_path, "ex1.json", rep["state"]))
    assert code == 3 and out["verdict"] == "not-monge"
    validate("monge_decomposition", out)

    broken = {"N": 3, "l": 2, "support": [{"alpha": 0.5, "rho": [2, 2]}, {"alpha": 0.5, "rho": [1, 2]}]}
    assert run(capsys, "decompose-monge", write(tmp_path, "b.json", broken))[0] == 1


def test_max_wasserstein(tmp_path, capsys, validate):
    f = write(tmp_path, "lam.json", ["1/2", "1/4", "1/4"])
    code, out, _ = run(capsys, "max-wasserstein", f, "4")
    expected = 4 / 3 * (1 - (0.25 + 0.0625 * 2))
    assert code == 0 and out["value"] == pytest.approx(expected) and out["unique"]
    validate("max_wasserstein", out)
    code, gs, _ = run(capsys, "max-wasserstein", f, "4", "--gs")
    assert gs["value"] == pytest.approx(6 * expected) and gs["objective"] == "gangbo-swiech"
    validate("max_wasserstein", gs)
    code, out, _ = run(capsys, "max-wasserstein", write(tmp_path, "d.json", {"marginal": [0, 1, 0]}), "3")
    assert out["value"] == pytest.approx(0.0)
    assert run(capsys, "max-wasserstein", write(tmp_path, "e.json", [0.5, 0.6]), "3")[0] == 1


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "mmot.cli", "enumerate", "3", "10"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["count"] == 66


def test_log_level_env(monkeypatch, capsys):
    monkeypatch.setenv("MMOT_LOG", "debug")
    assert run(capsys, "enumerate", "2", "2")[0] == 0


def test_problem_roundtrip(validate):
    from mmot.problem import ProblemFile

    prob = ProblemFile.load(EXAMPLE1)
    d = prob.to_dict()
    validate("problem", d)
    back = ProblemFile.from_dict(d)
    assert np.array_equal(back.cost.matrix, prob.cost.matrix) and back.N == 3
