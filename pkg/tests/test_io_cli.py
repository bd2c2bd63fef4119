import json
import subprocess
import sys

import numpy as np
import pytest

from edgesem import catalog, io
from edgesem.cli import main
from edgesem.constraints import derive_constraints, plan_removals
from edgesem.errors import CycleDetected, DuplicateEdge, ParseError, ValidationError
from edgesem.random_models import random_model, random_parameters
from edgesem.sem import CovMatrix, covariance_from_params, simulate


@pytest.fixture
def verma_files(tmp_path):
    g = catalog.verma()
    p = random_parameters(np.random.default_rng(0), g)
    (tmp_path / "g.json").write_text(io.dumps_graph(g))
    (tmp_path / "p.json").write_text(io.dumps_params(p))
    (tmp_path / "s.json").write_text(io.dumps_cov(covariance_from_params(p)))
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- serialization -------------------------------------------------------

def test_graph_roundtrip():
    for name, make in catalog.GRAPHS.items():
        g = make()
        assert io.loads_graph(io.dumps_graph(g)) == g, name


def test_params_and_cov_roundtrip_bit_for_bit():
    for seed in range(10):
        g, p = random_model(seed, 6, p_directed=0.4, p_bidirected=0.3)
        q = io.loads_params(io.dumps_params(p), g)
        assert q.lam == p.lam and q.omega == p.omega
        s = covariance_from_params(p)
        assert np.array_equal(io.loads_cov(io.dumps_cov(s)).values, s.values)


def test_dataset_roundtrip():
    d = simulate(catalog.MACS_SIGMA, 25, seed=0)
    e = io.loads_dataset(io.dumps_dataset(d))
    assert e.labels == d.labels and np.array_equal(e.rows, d.rows)


def test_constraint_set_serializes_to_json():
    g = catalog.verma()
    doc = derive_constraints(g, plan_removals(g)).to_dict()
    assert json.loads(json.dumps(doc)) == doc


def test_parse_errors_name_the_problem():
    with pytest.raises(ParseError, match="line 2"):
        io.loads_graph('{"vertices": ["1"],\n "directed": [}')
    with pytest.raises(ParseError, match="missing field 'vertices'"):
        io.loads_graph("{}")
    with pytest.raises(ParseError, match=r"directed\[0\]"):
        io.loads_graph('{"vertices": ["1", "2"], "directed": [["1"]]}')
    with pytest.raises(ParseError, match="values"):
        io.loads_cov('{"labels": ["a", "b"], "values": [[1, 0]]}')
    with pytest.raises(ParseError, match="expected a number"):
        io.loads_params('{"lambda": {"1->2": "x"}, "omega": {}}', catalog.instrumental_variable())
    with pytest.raises(ParseError, match="line 3 has 1 fields"):
        io.loads_dataset("a,b\n1,2\n3\n")
    with pytest.raises(ParseError, match="duplicate"):
        io.loads_dataset("a,a\n1,2\n")
    with pytest.raises(ParseError, match="cannot read"):
        io.load_graph("/nonexistent/g.json")


def test_invalid_graph_documents():
    with pytest.raises(DuplicateEdge):
        io.loads_graph('{"vertices": ["1", "2"], "directed": [["1", "2"], ["1", "2"]]}')
    with pytest.raises(CycleDetected):
        io.loads_graph('{"vertices": ["1", "2"], "directed": [["1", "2"], ["2", "1"]]}')
    assert issubclass(ParseError, ValidationError)


# -- command line --------------------------------------------------------

def test_validate(capsys, verma_files):
    code, out, _ = run(capsys, "validate", "--graph", verma_files / "g.json",
                       "--params", verma_files / "p.json", "--sigma", verma_files / "s.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["topological_order"] == ["1", "2", "3", "4"] and doc["sigma"] == "ok"


def test_validate_rejects_bad_graphs(capsys, tmp_path):
    (tmp_path / "dup.json").write_text('{"vertices": ["1", "2"], "bidirected": [["1", "2"], ["2", "1"]]}')
    (tmp_path / "cyc.json").write_text('{"vertices": ["1", "2"], "directed": [["1", "2"], ["2", "1"]]}')
    code, _, err = run(capsys, "validate", "--graph", tmp_path / "dup.json")
    assert code == 3 and err.startswith("error:")
    code, _, err = run(capsys, "validate", "--graph", tmp_path / "cyc.json")
    assert code == 3 and "cycle" in err


def test_identify_exit_codes(capsys, verma_files):
    g = verma_files / "g.json"
    code, out, _ = run(capsys, "identify", "--graph", g, "--edge", "3->4")
    assert code == 0 and json.loads(out)["details"]["lambda"]["adjustment"] == ["1", "2"]
    code, out, _ = run(capsys, "identify", "--graph", g, "--edge", "1->2", "--format", "table")
    assert code == 2 and out.startswith("FAIL") and "b not fixable" in out
    code, _, _ = run(capsys, "identify", "--graph", g, "--edge", "4->1", "--op", "add")
    assert code == 3
    code, out, _ = run(capsys, "identify", "--graph", g, "--op", "model")
    assert code == 0 and json.loads(out)["status"] == "generically-identifiable"


def test_identify_path_with_cut_vertices(capsys, tmp_path):
    (tmp_path / "g.json").write_text(io.dumps_graph(catalog.cut_vertex_example()))
    code, out, _ = run(capsys, "identify", "--graph", tmp_path / "g.json", "--edge", "2->6",
                       "--op", "path", "--method", "cutvertex", "--format", "table")
    assert code == 0
    assert "beta[2,4 | {1}]" in out and "beta[4,6 | {1, 2, 3}]" in out


def test_intervene_matches_library(capsys, verma_files):
    code, out, _ = run(capsys, "intervene", "--graph", verma_files / "g.json",
                       "--params", verma_files / "p.json", "--edge", "3->4")
    assert code == 0
    doc = json.loads(out)
    s = io.load_cov(verma_files / "s.json")
    from edgesem.intervene import remove_directed
    expect = remove_directed(s, catalog.verma(), "3", "4").new_cov
    assert io.cov_from_dict(doc["covariance"]).values.tolist() == expect.values.tolist()
    assert ["3", "4"] not in doc["graph"]["directed"]


def test_intervene_not_identifiable_and_bad_sources(capsys, verma_files):
    g, p, s = (verma_files / f for f in ("g.json", "p.json", "s.json"))
    code, _, err = run(capsys, "intervene", "--graph", g, "--params", p, "--edge", "1->2")
    assert code == 2 and err.startswith("not identifiable: ") and "b not fixable" in err
    code, _, err = run(capsys, "intervene", "--graph", g, "--params", p, "--sigma", s, "--edge", "3->4")
    assert code == 3 and "exactly one" in err
    code, _, err = run(capsys, "intervene", "--graph", g, "--params", p, "--edge", "3->4", "--op", "add")
    assert code == 3 and "--lambda" in err


def test_argparse_errors_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["identify"])
    assert exc.value.code == 3
    capsys.readouterr()


def test_constraints_command(capsys, verma_files):
    code, out, _ = run(capsys, "constraints", "--graph", verma_files / "g.json",
                       "--params", verma_files / "p.json")
    assert code == 0
    doc = json.loads(out)
    assert doc["pairs"] == [["1", "4"]]
    assert doc["residuals"][0]["vanishes"] is True
    code, out, _ = run(capsys, "constraints", "--graph", verma_files / "g.json",
                       "--params", verma_files / "p.json", "--format", "table")
    assert "plan: 3->4, 2->3, 1->3, 1->2" in out and "yes" in out


def test_no_plan_exits_2(capsys, tmp_path):
    (tmp_path / "g.json").write_text(io.dumps_graph(catalog.instrumental_variable()))
    code, _, err = run(capsys, "constraints", "--graph", tmp_path / "g.json")
    assert code == 2 and err


def test_random_is_deterministic_and_density_zero_is_empty(capsys, tmp_path):
    run(capsys, "random", "--seed", 7, "--out", tmp_path / "a")
    run(capsys, "random", "--seed", 7, "--out", tmp_path / "b")
    for kind in ("graph", "params"):
        assert (tmp_path / f"a.{kind}.json").read_text() == (tmp_path / f"b.{kind}.json").read_text()
    code, out, _ = run(capsys, "random", "--vertices", 5, "--p-directed", 0, "--p-bidirected", 0)
    doc = json.loads(out)
    assert code == 0 and doc["graph"]["directed"] == [] and doc["graph"]["bidirected"] == []


def test_cov_and_treks(capsys, verma_files):
    code, out, _ = run(capsys, "cov", "--graph", verma_files / "g.json", "--params", verma_files / "p.json")
    assert code == 0
    assert io.cov_from_dict(json.loads(out)).values.tolist() == io.load_cov(verma_files / "s.json").values.tolist()
    code, out, _ = run(capsys, "treks", "--graph", verma_files / "g.json", "--params", verma_files / "p.json",
                       "--pair", "2,4")
    doc = json.loads(out)
    s = io.load_cov(verma_files / "s.json")
    assert doc["count"] == 4 and doc["sum"] == pytest.approx(s["2", "4"], rel=1e-12)


def test_simulate_and_transform(capsys, verma_files):
    g, p = verma_files / "g.json", verma_files / "p.json"
    data, out_csv = verma_files / "d.csv", verma_files / "t.csv"
    assert run(capsys, "simulate", "--graph", g, "--params", p, "--n", 200, "--seed", 3, "--out", data)[0] == 0
    first = data.read_text()
    run(capsys, "simulate", "--graph", g, "--params", p, "--n", 200, "--seed", 3, "--out", data)
    assert data.read_text() == first
    code, _, err = run(capsys, "transform", "--graph", g, "--data", data, "--edge", "3->4", "--out", out_csv)
    assert code == 0 and json.loads(err)["standardization"] is not None
    before, after = io.load_dataset(data), io.load_dataset(out_csv)
    # Only the descendants of the edge head change.
    assert np.array_equal(before.rows[:, :3], after.rows[:, :3])
    assert not np.allclose(before.rows[:, 3], after.rows[:, 3])


def test_transform_with_true_params_matches_library(capsys, verma_files):
    from edgesem.intervene import transform_data_remove
    g, p, data = verma_files / "g.json", verma_files / "p.json", verma_files / "d.csv"
    s = io.load_cov(verma_files / "s.json")
    io.write_text(data, io.dumps_dataset(simulate(s, 50, seed=4)))
    code, out, _ = run(capsys, "transform", "--graph", g, "--params", p, "--data", data, "--edge", "3->4")
    assert code == 0
    expect = transform_data_remove(io.load_dataset(data), s, catalog.verma(), "3", "4")
    assert np.allclose(io.loads_dataset(out).rows, expect.rows, atol=1e-12)


def test_console_script_entry(verma_files):
    proc = subprocess.run([sys.executable, "-m", "edgesem.cli", "identify", "--graph",
                           str(verma_files / "g.json"), "--edge", "1->2"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["reason"].startswith("b not fixable")


def test_cli_output_is_deterministic(capsys, verma_files):
    argv = ["intervene", "--graph", verma_files / "g.json", "--sigma", verma_files / "s.json", "--edge", "3->4"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_label_mismatch_in_sigma(capsys, verma_files):
    bad = verma_files / "bad.json"
    bad.write_text(io.dumps_cov(CovMatrix("1235", np.eye(4))))
    code, _, err = run(capsys, "intervene", "--graph", verma_files / "g.json", "--sigma", bad, "--edge", "3->4")
    assert code == 3 and "5" in err
