import json
import subprocess
import sys

import numpy as np
import pytest

from mdarp.bench import BenchConfig, records_to_csv, run_benchmark
from mdarp.cli import main
from mdarp.errors import BadParams
from mdarp.generators import KINDS, generate_instance
from mdarp.metric import instance_to_dict, load_instance, save_instance, validate_metric
from mdarp.oracle import exact_tsp
from mdarp.routing import load_solution, verify_solution


@pytest.mark.parametrize("kind", KINDS)
def test_generators_are_deterministic_metrics(kind):
    a = generate_instance(kind, n=12, m=6, h=2, capacity=2, seed=7)
    b = generate_instance(kind, n=12, m=6, h=2, capacity=2, seed=7)
    assert save_instance(a) == save_instance(b)
    assert validate_metric(a.metric) == []
    if a.metric.coords is not None:
        assert validate_metric(a.metric.table) == []


def test_line_generator_collinear():
    inst = generate_instance("line", n=15, m=5, seed=2)
    assert np.all(inst.metric.coords[:, 1] == 0)


def test_tightness_generator():
    inst = generate_instance("tightness", r=9)
    assert exact_tsp(inst.metric, range(1, 10)).value == 3.0
    assert validate_metric(inst.metric) == []


def test_generator_bad_params():
    with pytest.raises(BadParams):
        generate_instance("nope")
    with pytest.raises(BadParams):
        generate_instance("euclidean", n=2, h=3)


def test_bench_tiny_contracts():
    cfg = BenchConfig.from_dict({"instances": [{"kind": "euclidean", "n": 6, "m": 4, "h": 1, "capacity": 2,
                                                "seeds": [1, 2]}],
                                 "algorithms": ["alg1", "alg2", "combined", "exact"]})
    recs = run_benchmark(cfg)
    assert len(recs) == 8
    for k in range(0, 8, 4):
        a1, a2, c, ex = recs[k:k + 4]
        assert c.weight == min(a1.weight, a2.weight)
        assert all(ex.weight <= r.weight + 1e-9 for r in (a1, a2, c))
        assert all(r.feasible for r in (a1, a2, c, ex))
        assert all(r.opt_ratio >= 1 - 1e-6 for r in (a1, a2, c))
        assert a1.ratio == pytest.approx(a1.weight / a1.best_lb)


def test_bench_empty_and_error_rows():
    assert records_to_csv(run_benchmark(BenchConfig())).count("\n") == 1
    cfg = BenchConfig.from_dict({"instances": [{"kind": "euclidean", "n": 8, "m": 8, "h": 1, "capacity": 2, "seeds": [0]}],
                                 "algorithms": ["exact", "alg1"], "max_states": 5})
    exact_row, a1 = run_benchmark(cfg)
    assert exact_row.error.startswith("LimitExceeded") and exact_row.weight is None
    assert a1.feasible


def test_bench_csv_stable():
    cfg = BenchConfig.from_dict({"instances": [{"kind": "clustered", "n": 20, "m": 10, "h": 2, "capacity": 3, "seeds": [4]}],
                                 "algorithms": ["alg1", "improved"], "timing": False})
    assert records_to_csv(run_benchmark(cfg)) == records_to_csv(run_benchmark(cfg))


def test_cli_roundtrip(tmp_path, capsys):
    inst_f, sol_f = tmp_path / "i.json", tmp_path / "s.json"
    assert main(["gen", "--kind", "euclidean", "--n", "8", "--m", "5", "--vehicles", "2",
                 "--capacity", "2", "--seed", "3", "--output", str(inst_f)]) == 0
    for alg in ("alg1", "alg2", "combined", "improved", "exact"):
        assert main(["solve", "--algorithm", alg, "--input", str(inst_f), "--output", str(sol_f)]) == 0
        sol = load_solution(sol_f.read_bytes())
        assert verify_solution(load_instance(inst_f.read_bytes()), sol).ok
    capsys.readouterr()
    assert main(["verify", "--instance", str(inst_f), "--solution", str(sol_f)]) == 0
    assert capsys.readouterr().out.strip() == "OK"
    assert main(["lb", "--input", str(inst_f)]) == 0
    lb = json.loads(capsys.readouterr().out)
    assert lb["best"] == max(lb["flow"], lb["steiner_forest"], lb["mtsp"])


def test_cli_seeded_alg1_is_randomized(tmp_path):
    inst_f, sol_f = tmp_path / "i.json", tmp_path / "s.json"
    main(["gen", "--kind", "euclidean", "--n", "20", "--m", "15", "--capacity", "2", "--output", str(inst_f)])
    main(["solve", "--algorithm", "alg1", "--input", str(inst_f), "--output", str(sol_f), "--seed", "5"])
    doc = json.loads(sol_f.read_text())
    assert doc["algorithm"] == "alg1-random" and doc["seed"] == 5
    main(["solve", "--algorithm", "alg1", "--input", str(inst_f), "--output", str(sol_f), "--seed", "5",
          "--derandomize"])
    assert json.loads(sol_f.read_text())["algorithm"] == "alg1"


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"capacity": 1}')
    assert main(["solve", "--algorithm", "alg1", "--input", str(bad)]) == 2
    inst_f = tmp_path / "i.json"
    main(["gen", "--kind", "euclidean", "--n", "8", "--m", "8", "--output", str(inst_f)])
    assert main(["solve", "--algorithm", "exact", "--max-states", "3", "--input", str(inst_f)]) == 3
    sol_f = tmp_path / "s.json"
    main(["solve", "--algorithm", "alg2", "--input", str(inst_f), "--output", str(sol_f)])
    doc = json.loads(sol_f.read_text())
    doc["routes"][0]["stops"] = doc["routes"][0]["stops"][:1]
    sol_f.write_text(json.dumps(doc))
    assert main(["verify", "--instance", str(inst_f), "--solution", str(sol_f)]) == 1


def test_cli_bench(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"instances": [{"kind": "line", "n": 6, "m": 3, "seeds": [0]}],
                               "algorithms": ["alg1"], "timing": False}))
    out = tmp_path / "o.csv"
    assert main(["bench", "--config", str(cfg), "--csv", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("instance_id,n,m,h,capacity,algorithm,weight") and len(lines) == 2


def test_module_entry_point(tmp_path):
    inst_f = tmp_path / "i.json"
    r = subprocess.run([sys.executable, "-m", "mdarp.cli", "gen", "--kind", "line", "--output", str(inst_f)])
    assert r.returncode == 0 and load_instance(inst_f.read_bytes()).n == 10
