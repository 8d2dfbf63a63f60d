import json

import numpy as np
import pytest

from qgraph.cli import RunConfig, InputError, main
from qgraph.systems import constant_diagonal_system


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_invariant_phi_lin_table(capsys):
    code, out, _ = run(capsys, "invariant", "phi-lin", "path:5")
    assert code == 0
    assert "1.9798" in out and "graph_sdp" in out


def test_invariant_theta_minus_edge_json(capsys):
    code, out, _ = run(capsys, "invariant", "theta", "complete:11", "--minus-edge", "1,2",
                       "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["value"] == pytest.approx(2.0, abs=1e-6)


def test_invariant_omega_csv(capsys):
    code, out, _ = run(capsys, "invariant", "omega", "wheel:5", "--format", "csv")
    assert code == 0
    header, line = out.strip().splitlines()
    assert dict(zip(header.split(","), line.split(",")))["value"] == "3"


def test_invariant_alpha(capsys):
    code, out, _ = run(capsys, "invariant", "alpha", "star:5", "--format", "json")
    assert json.loads(out)["rows"][0]["value"] == 4


def test_invariant_edge_list_file(tmp_path, capsys):
    f = tmp_path / "p5.txt"
    f.write_text("5 4\n1 2\n2 3\n3 4\n4 5\n")
    code, out, _ = run(capsys, "invariant", "phi-quad", str(f))
    assert code == 0 and "1.9593" in out


def test_invariant_system_json(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(constant_diagonal_system(2).to_json())
    code, out, _ = run(capsys, "invariant", "phi-quad", "--system", str(f), "--format", "json",
                       "--certificate")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["value"] == pytest.approx(1.5, abs=1e-6)
    assert np.asarray(row["certificate"]).shape == (4, 4)


@pytest.mark.parametrize("argv", [
    ("invariant", "theta", "bogus:3"),
    ("invariant", "theta"),
    ("invariant", "theta", "path:3", "--minus-edge", "1,3"),
    ("invariant", "theta", "path:3", "--tol-gap", "0.5"),
    ("invariant", "theta", "path:3", "--tol-gap", "0"),
    ("invariant", "theta", "path:3", "--max-iter", "0"),
    ("invariant", "omega", "--system", "nope.json"),
    ("verify", "--families", "petersen"),
    ("counterexamples", "--only", "7"),
    ("explore", "cycles", "--max-n", "13"),
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and "error" in err


def test_bad_system_file(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text('{"n": 2, "basis": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}')
    code, _, err = run(capsys, "invariant", "phi-lin", "--system", str(f))
    assert code == 1


def test_non_convergence_exit_2(capsys):
    code, _, err = run(capsys, "invariant", "theta", "cycle:7", "--max-iter", "3")
    assert code == 2 and "converge" in err


def test_env_tolerance_and_flag_precedence(monkeypatch, capsys):
    monkeypatch.setenv("QG_TOL_GAP", "5")
    code, _, _ = run(capsys, "invariant", "theta", "cycle:5")
    assert code == 1
    code, out, _ = run(capsys, "invariant", "theta", "cycle:5", "--tol-gap", "1e-8")
    assert code == 0 and "2.2361" in out


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig("invariant", tol_feas=1.0)
    assert RunConfig("invariant").solver_options() is None


def test_verify_restricted(capsys):
    code, out, _ = run(capsys, "verify", "--families", "path,cycle", "--max-n", "5",
                       "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert {r["input"].split(":")[0] for r in rows if ":" in r["input"]} >= {"path", "cycle"}


def test_verify_injected_failure(capsys):
    code, _, err = run(capsys, "verify", "--families", "path", "--max-n", "3",
                       "--check-tol", "-1")
    assert code == 3 and "failed" in err and "clique_bound" in err


def test_counterexamples_only_3(capsys):
    code, out, err = run(capsys, "counterexamples", "--only", "3", "--format", "json")
    row = json.loads(out)["rows"][0]
    assert row["item"] == 3 and row["matches_paper"]
    # not a counterexample under the accurate formulation
    assert code == 3 and "item 3" in err
    code, _, _ = run(capsys, "counterexamples", "--only", "3", "--form", "squared")
    assert code == 0


def test_counterexamples_table(capsys):
    code, out, _ = run(capsys, "counterexamples", "--only", "1,2,4,5")
    assert code == 0
    for v in ("1.9798", "1.9593", "2.9314", "3.8660", "3.8387", "1.8000", "4.0000"):
        assert v in out


def test_explore_cycles_quad(capsys):
    code, out, _ = run(capsys, "explore", "cycles", "--max-n", "6", "--quad", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert "phi_quad(~C_n)" in lines[0] and len(lines) == 5


def test_output_path_and_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        f = tmp_path / f"o{k}.json"
        assert main(["explore", "cycles", "--max-n", "5", "--format", "json", "--seed", "7",
                     "--output-path", str(f)]) == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["meta"]["seed"] == 7
