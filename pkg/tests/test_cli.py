import csv
import json

import numpy as np
import pytest

from quickassort.cli import AGGREGATE_COLUMNS, EXIT_ERROR, EXIT_LIMIT, EXIT_OK, main
from quickassort.idm import generate_idm
from quickassort.instance import IdmInstance, from_arrays, read_instance, validate, write_instance
from quickassort.solution import STATS_COLUMNS


def gen(tmp_path, name="i.json", *extra, n=8, m=3, seed=1, u=5):
    path = tmp_path / name
    argv = ["generate", "--n", str(n), "--m", str(m), "--u-on0", str(u), "--seed", str(seed), "--out", str(path)]
    assert main(argv + list(extra)) == EXIT_OK
    return path


def test_generate_valid_and_reproducible(tmp_path):
    a = gen(tmp_path, "a.json", n=100, m=50, seed=1)
    b = gen(tmp_path, "b.json", n=100, m=50, seed=1)
    assert a.read_bytes() == b.read_bytes()
    inst = read_instance(a)
    assert validate(inst) == [] and inst.n == 100 and inst.m == 50
    c = gen(tmp_path, "c.json", "--luce", "--cardinality", "4", n=30, m=10)
    inst = read_instance(c)
    assert inst.orders and inst.offline_constraint.K == 4


def test_generate_rejects_fewer_products_than_segments(tmp_path, capsys):
    code = main(["generate", "--n", "2", "--m", "3", "--u-on0", "2", "--out", str(tmp_path / "x.json")])
    assert code == EXIT_ERROR
    assert "n >= m" in capsys.readouterr().err
    assert not (tmp_path / "x.json").exists()


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "two"])
    assert exc.value.code != 0


def test_solve_ch_ro_failure_toy(tmp_path, toy):
    write_instance(toy, tmp_path / "toy.json")
    out = tmp_path / "sol.json"
    assert main(["solve", "--in", str(tmp_path / "toy.json"), "--method", "ch", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["objective"] == pytest.approx(9.1096, abs=1e-4)
    assert doc["offline"] == [1, 3]
    rows = list(csv.DictReader((tmp_path / "sol.csv").open()))
    assert tuple(rows[0]) == STATS_COLUMNS and rows[0]["instance"] == "toy"


def test_solve_ro_gap_toy(tmp_path, gap_toy, capsys):
    write_instance(gap_toy, tmp_path / "ex.json")
    assert main(["solve", "--in", str(tmp_path / "ex.json"), "--method", "ro", "--stats", str(tmp_path / "s.csv")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert round(doc["objective"], 3) == 15.528
    assert (tmp_path / "s.csv").exists()


def test_oracle_refuses_large_instance(tmp_path, capsys):
    path = gen(tmp_path, n=20, m=5)
    assert main(["solve", "--in", str(path), "--method", "oracle"]) == EXIT_ERROR
    assert "oracle refuses n=20" in capsys.readouterr().err


def test_solve_methods_agree_on_small_instance(tmp_path, capsys):
    path = gen(tmp_path, n=8, m=3, seed=4)
    values = {}
    for method in ("ch", "milp", "oracle"):
        assert main(["solve", "--in", str(path), "--method", method, "--gap", "1e-9"]) == EXIT_OK
        values[method] = json.loads(capsys.readouterr().out)["objective"]
    assert values["ch"] == pytest.approx(values["oracle"], abs=1e-6)
    assert values["milp"] == pytest.approx(values["oracle"], abs=1e-6)


def test_exit_codes(tmp_path):
    assert main(["solve", "--in", str(tmp_path / "missing.json")]) == EXIT_ERROR
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--in", str(bad)]) == EXIT_ERROR
    path = gen(tmp_path, "big.json", "--luce", n=40, m=20, seed=1, u=10)
    argv = ["solve", "--in", str(path), "--k", "0", "--gap", "0", "--node-limit", "1", "--out", str(tmp_path / "s.json")]
    assert main(argv) == EXIT_LIMIT


def test_bench_methods_agree(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({"n": [6], "m": [2], "u_on0": [2.0, 5.0], "seeds": [0, 1, 2],
                               "methods": ["ch", "milp"], "gap": 1e-9}))
    out = tmp_path / "bench"
    assert main(["bench", "--config", str(cfg), "--out-dir", str(out)]) == EXIT_OK
    runs = list(csv.DictReader((out / "runs.csv").open()))
    assert len(runs) == 12 and all(r["error"] == "" for r in runs)
    by_inst = {}
    for r in runs:
        by_inst.setdefault(r["instance"], []).append(float(r["obj"]))
    assert len(by_inst) == 6
    for objs in by_inst.values():
        assert objs[0] == pytest.approx(objs[1], abs=1e-6)
    agg = list(csv.DictReader((out / "aggregate.csv").open()))
    assert tuple(agg[0]) == AGGREGATE_COLUMNS
    assert all(int(a["Solved"]) == 3 for a in agg)
    profile = list(csv.DictReader((out / "profile.csv").open()))
    assert min(float(p["ratio"]) for p in profile) == 1.0
    probs = sorted((out / "assortments").glob("*.csv"))
    assert len(probs) == 12
    assert probs[0].read_text().splitlines()[0].startswith("segment,p1")


def test_bench_records_failures_and_continues(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({"n": [20], "m": [3], "seeds": [0], "methods": ["oracle", "ro"]}))
    out = tmp_path / "bench"
    assert main(["bench", "--config", str(cfg), "--out-dir", str(out)]) == EXIT_OK
    runs = {r["method"]: r for r in csv.DictReader((out / "runs.csv").open())}
    assert "oracle refuses" in runs["oracle"]["error"]
    assert runs["RO"]["error"] == ""


def test_bench_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({"n": [6], "colour": "red"}))
    assert main(["bench", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == EXIT_ERROR


def test_idm_single_product(tmp_path, capsys):
    base = from_arrays([0.5, 0.5], 1.0, [[10.0], [10.0]], [[1.0], [1.0]])
    write_instance(IdmInstance(base, np.array([[0.3]])), tmp_path / "idm.json")
    assert main(["idm", "--in", str(tmp_path / "idm.json"), "--samples", "5", "--seed", "3"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["objective"] == pytest.approx(4.0)
    assert doc["samples"] == [[1]] * 5


def test_idm_samples_reproducible(tmp_path):
    write_instance(generate_idm(8, 2, 5, arc_prob=0.3), tmp_path / "idm.json")
    outs = []
    for name in ("a.json", "b.json"):
        argv = ["idm", "--in", str(tmp_path / "idm.json"), "--samples", "50", "--seed", "1", "--out", str(tmp_path / name)]
        assert main(argv) == EXIT_OK
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert doc["expected_revenue"] == pytest.approx(doc["objective"], abs=1e-7)


def test_idm_requires_idm_section(tmp_path, toy):
    write_instance(toy, tmp_path / "toy.json")
    assert main(["idm", "--in", str(tmp_path / "toy.json")]) == EXIT_ERROR


@pytest.mark.slow
def test_simulate_gap_decreases(tmp_path):
    path = gen(tmp_path, n=100, m=50, seed=1, u=2)
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--in", str(path), "--t", "500,1000,2000", "--paths", "400", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    gaps = [float(r["gap_pct"]) for r in rows]
    assert [int(r["T"]) for r in rows] == [500, 1000, 2000]
    assert gaps[0] > gaps[1] > gaps[2] > 0
