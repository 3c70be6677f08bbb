import csv
import json

import pytest

from sgpdesign.cli import main
from sgpdesign.graphs import BaseTopology
from sgpdesign.topologies import GeneratorSpec, random_geometric, windmill
from sgpdesign.errors import ConfigError


def test_generate_windmills(tmp_path, capsys):
    out = tmp_path / "w.txt"
    assert main(["generate", "--gen", "windmill:m=3,k=21", "--out", str(out)]) == 0
    base = BaseTopology.from_file(out)
    assert base.n == 61 and base.undirected.num_edges == 3 * 21 * 20 // 2
    assert main(["generate", "--gen", "windmill:m=2,k=6"]) == 0
    text = capsys.readouterr().out
    base = BaseTopology.from_text(text)
    assert (base.n, base.undirected.num_edges) == (11, 30)


def test_generate_geometric_is_seeded(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["generate", "--gen", "rg:n=33,radius=0.5", "--seed", "4", "--out", str(a)]) == 0
    assert main(["generate", "--gen", "random_geometric:n=33,radius=0.5,seed=4", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    base = BaseTopology.from_file(a)
    assert base.n == 33 and base.undirected.is_connected()


def test_generator_spec_errors():
    with pytest.raises(ConfigError):
        GeneratorSpec.parse("windmill:m=3").build()
    with pytest.raises(ConfigError):
        GeneratorSpec.parse("torus:n=4").build()
    with pytest.raises(ValueError):
        windmill(0, 3)
    assert GeneratorSpec.parse("edges:some/file.txt").params == {"path": "some/file.txt"}
    assert random_geometric(20, 0.4, 9).n == 20


def test_design_windmill_3_21(tmp_path, capsys):
    assert main(["design", "--gen", "windmill:m=3,k=21", "--k", "0", "--out", str(tmp_path)]) == 0
    assert "tau=23" in capsys.readouterr().out
    data = json.loads((tmp_path / "design.json").read_text())
    assert data["metrics"]["tau"] == 23
    assert len(json.loads((tmp_path / "schedule.json").read_text())) == 23
    assert (tmp_path / "mixing.txt").read_text().startswith("61\n")


def test_design_pair_and_round_trip(tmp_path, capsys):
    topo = tmp_path / "pair.txt"
    topo.write_text("0 1\n")
    assert main(["design", "--topology", str(topo), "--out", str(tmp_path / "d")]) == 0
    data = json.loads((tmp_path / "d" / "design.json").read_text())
    assert sorted(map(tuple, data["links"])) == [(0, 1), (1, 0)]
    assert data["metrics"]["tau"] == 2
    capsys.readouterr()
    assert main(["schedule", "--topology", str(topo), "--links", str(tmp_path / "d" / "design.json"), "--out", str(tmp_path / "s")]) == 0
    assert "tau=2 " in capsys.readouterr().out


def test_disconnected_topology_reports_components(tmp_path, capsys):
    topo = tmp_path / "bad.txt"
    topo.write_text("0 1\n2 3\n")
    assert main(["design", "--topology", str(topo), "--out", str(tmp_path)]) == 1
    assert "[0, 1]" in capsys.readouterr().err


def test_missing_topology_is_usage_error(capsys):
    assert main(["design"]) == 2


def test_sweep_writes_curve(tmp_path):
    assert main(["sweep-k", "--gen", "windmill:m=2,k=6", "--k-max", "4", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert [int(r["K"]) for r in rows] == [0, 1, 2, 3, 4]
    assert (tmp_path / "design.json").exists()


def test_simulate_compare_writes_traces(tmp_path, capsys):
    args = ["simulate", "--gen", "windmill:m=2,k=4", "--seed", "3", "--eps", "1e-6", "--eta", "0.5", "--max-iters", "50"]
    assert main(args + ["--compare", "--out", str(tmp_path)]) == 0
    for arm in ("sgp-designed", "dpsgd-vanilla", "sgp-vanilla"):
        head = (tmp_path / f"trace_{arm}.csv").read_text().splitlines()[0]
        assert head == "iter,slots,grad_norm_sq,running_avg_grad_norm_sq,consensus_err,loss"


def test_simulate_from_config(tmp_path):
    cfg = {"gen": "windmill:m=2,k=4", "seed": 1, "eps": 1e-6, "algorithm": "dpsgd", "eta": 0.5, "max_iters": 30, "out": str(tmp_path)}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(path)]) == 0
    first = (tmp_path / "trace_dpsgd-vanilla.csv").read_text()
    assert main(["simulate", "--config", str(path)]) == 0
    assert (tmp_path / "trace_dpsgd-vanilla.csv").read_text() == first


def test_simulate_missing_field_is_usage_error(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"gen": "windmill:m=2,k=4", "eps": 1e-3}))
    assert main(["simulate", "--config", str(path)]) == 2
    assert "seed" in capsys.readouterr().err


def test_verify_quick_passes(capsys):
    assert main(["verify", "--level", "quick"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "FAIL" not in out
