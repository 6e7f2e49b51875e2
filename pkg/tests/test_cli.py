"""Command-line interface: exit codes, file outputs, determinism."""

import json
from pathlib import Path

import pytest

from leeyang.cli import main
from leeyang.gibbs import DiscretizedDistribution
from leeyang.gmc import load_field_snapshot

EDGE_GRAPH = json.dumps({
    "vertices": ["x", "y"], "edges": [["x", "y"]],
    "J": {"x|y": 1.0}, "lambda": {"x": 1.0, "y": 1.0},
})

THREE_ATOM_CSV = "x,w\n-2.0,0.1\n0.0,0.8\n2.0,0.1\n"


@pytest.fixture
def edge_graph(tmp_path):
    p = tmp_path / "edge.json"
    p.write_text(EDGE_GRAPH)
    return str(p)


def test_villain_verify_passes(edge_graph, tmp_path, capsys):
    out = str(tmp_path / "out")
    code = main(["villain-verify", "--graph", edge_graph, "--grid-n", "64",
                 "--out", out])
    assert code == 0
    assert "PIZ-in-region" in capsys.readouterr().out
    doc = json.loads((Path(out) / "zero_report.json").read_text())
    assert doc["format_version"] == 1
    assert doc["config"]["subcommand"] == "villain-verify"
    assert doc["results"]["verdict"] == "PIZ-in-region"
    assert doc["results"]["max_grid_displacement"] < 1e-9


def test_spin_dist_then_zeros_pipeline(edge_graph, tmp_path):
    out1 = str(tmp_path / "d")
    assert main(["spin-dist", "--graph", edge_graph, "--model", "villain",
                 "--grid-n", "64", "--out", out1]) == 0
    csv_path = Path(out1) / "spin_dist.csv"
    assert csv_path.read_text().startswith("# config:")
    d = DiscretizedDistribution.from_csv(csv_path.read_text())
    assert abs(d.ws.sum() - 1.0) < 1e-12

    out2 = str(tmp_path / "z")
    assert main(["zeros", "--dist", str(csv_path), "--region", "-4", "4", "0", "8",
                 "--out", out2]) == 0
    rep = json.loads((Path(out2) / "zero_report.json").read_text())
    assert rep["results"]["verdict"] == "PIZ-in-region"

    # the written report feeds straight back into classification
    out3 = str(tmp_path / "c")
    assert main(["classify", "--dist", str(csv_path),
                 "--zeros", str(Path(out2) / "zero_report.json"),
                 "--out", out3]) == 0
    verdict = json.loads((Path(out3) / "class_verdict.json").read_text())
    assert verdict["results"]["verdict"] == "consistent-with-class"


def test_zeros_finds_off_axis(tmp_path):
    dist = tmp_path / "three.csv"
    dist.write_text(THREE_ATOM_CSV)
    out = str(tmp_path / "z")
    assert main(["zeros", "--dist", str(dist), "--region", "-2", "2", "0", "2",
                 "--out", out]) == 0
    rep = json.loads((Path(out) / "zero_report.json").read_text())
    assert rep["results"]["verdict"] == "off-axis-zero-found"


def test_classify_from_tail(tmp_path):
    out = str(tmp_path / "c")
    assert main(["classify", "--tail-a", "1.3889", "--out", out]) == 0
    doc = json.loads((Path(out) / "class_verdict.json").read_text())
    assert doc["results"]["verdict"] == "excluded-by-slow-tail"


def test_classify_needs_evidence(tmp_path, capsys):
    assert main(["classify", "--out", str(tmp_path)]) == 2


def test_chain_limit_csv(tmp_path):
    out = str(tmp_path / "cl")
    assert main(["chain-limit", "--n-list", "16,32", "--grid-n", "128",
                 "--out", out]) == 0
    text = (Path(out) / "chain_limit.csv").read_text()
    assert text.startswith("# config:")
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    assert rows[0] == "n,b,sup_distance,l1_distance,ratio,limit_ratio"
    assert len(rows) == 3


def test_dirichlet_ratio_output(tmp_path):
    out = str(tmp_path / "dr")
    assert main(["dirichlet-ratio", "--n", "16", "--grid-n", "128", "--out", out]) == 0
    doc = json.loads((Path(out) / "dirichlet_ratio.json").read_text())
    assert abs(doc["results"]["ratio"] - doc["results"]["limit_ratio"]) < 0.05


def test_gmc_moments_deterministic(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    args = ["gmc-moments", "--beta-sq", "0.5", "--k-max", "4",
            "--samples", "20000", "--seed", "11"]
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    a = (Path(out1) / "gmc_moments.json").read_text()
    b = (Path(out2) / "gmc_moments.json").read_text()
    assert a.replace(out1, "") == b.replace(out2, "")
    doc = json.loads(a)
    assert len(doc["results"]["moments"]) == 4
    assert doc["results"]["slowtail_flagged"] is False


def test_gmc_moments_requires_seed(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gmc-moments", "--beta-sq", "1.0"])
    assert exc.value.code == 2


def test_unknown_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_dgff_check(tmp_path):
    out = str(tmp_path / "dg")
    assert main(["dgff-check", "--side", "5", "--samples", "20000",
                 "--seed", "3", "--out", out]) == 0
    doc = json.loads((Path(out) / "dgff_check.json").read_text())
    assert doc["results"]["frobenius_relative_error"] < 0.1


def test_m_stat_with_field_dump(tmp_path):
    out = str(tmp_path / "ms")
    assert main(["m-stat", "--n", "3", "--r", "2.0", "--beta", "1.2",
                 "--samples", "2000", "--bins", "60", "--bootstrap", "20",
                 "--seed", "19", "--out", out, "--dump-field", "field.bin"]) == 0
    doc = json.loads((Path(out) / "m_stat.json").read_text())
    assert doc["results"]["exploratory"] is True
    assert abs(doc["results"]["mean"]) < 0.5
    snap = load_field_snapshot(Path(out) / "field.bin")
    assert snap["n"] == 3 and snap["beta"] == 1.2 and snap["seed"] == 19


def test_config_file_provides_defaults(edge_graph, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid_n": 64}))
    out = str(tmp_path / "o")
    assert main(["spin-dist", "--graph", edge_graph, "--config", str(cfg),
                 "--out", out]) == 0
    doc = json.loads((Path(out) / "spin_dist.json").read_text())
    assert doc["config"]["grid_n"] == 64  # file value honoured when flag absent
    # explicit flag wins over the file
    out2 = str(tmp_path / "o2")
    assert main(["spin-dist", "--graph", edge_graph, "--config", str(cfg),
                 "--grid-n", "32", "--out", out2]) == 0
    doc2 = json.loads((Path(out2) / "spin_dist.json").read_text())
    assert doc2["config"]["grid_n"] == 32


def test_missing_graph_file_is_usage_error(tmp_path):
    assert main(["spin-dist", "--graph", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 2


def test_numerical_failure_maps_to_exit_1(monkeypatch, edge_graph, tmp_path, capsys):
    import leeyang.cli as cli
    from leeyang.errors import NumericalError

    def boom(args):
        raise NumericalError("synthetic failure")

    monkeypatch.setattr(cli, "_cmd_spin_dist", boom)
    assert main(["spin-dist", "--graph", edge_graph, "--out", str(tmp_path)]) == 1
    assert "numerical failure" in capsys.readouterr().err


def test_threads_do_not_change_results(tmp_path):
    outs = []
    for i, threads in enumerate(("1", "3")):
        out = str(tmp_path / f"t{i}")
        assert main(["gmc-moments", "--beta-sq", "0.5", "--k-max", "4",
                     "--samples", "20000", "--seed", "11",
                     "--threads", threads, "--out", out]) == 0
        text = (Path(out) / "gmc_moments.csv").read_text()
        outs.append("\n".join(ln for ln in text.splitlines()
                              if not ln.startswith("#")))
    assert outs[0] == outs[1]
