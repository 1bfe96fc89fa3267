import json

import pytest

from ggdminer import cli
from ggdminer.config import ConfigError, RunConfig
from ggdminer.generator import (PlantSpec, SpecError, generate_hub_graph, generate_planted_graph,
                                generate_schema_graph, write_generated)


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    out = tmp_path_factory.mktemp("planted")
    G, truth = generate_planted_graph(PlantSpec(sources=300, noise_d=200, noise_e=100), seed=3)
    return write_generated(G, truth, out), truth


def _run(argv):
    return cli.main([str(a) for a in argv])


def _graph_argv(paths):
    return ["--nodes", paths["nodes"], "--edges", paths["edges"], "--schema", paths["schema"]]


def test_config_defaults_and_validation(tmp_path):
    c = RunConfig()
    assert (c.tau, c.epsilon, c.similarity_threshold, c.k, c.source_capacity, c.hops, c.k_g) == \
        (1000, 0.7, 0.5, 2, 7, 2, 10)
    for bad in ({"epsilon": 1.5}, {"tau": 0}, {"k_g": 0}, {"hops": -1}, {"boundaries": {"string": [1, 0]}}):
        with pytest.raises(ConfigError):
            RunConfig(**bad)
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"nope": 1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"tau": 7}))
    assert RunConfig.load(p).tau == 7
    assert RunConfig.load(p).replace(tau=None, k=3).to_dict()["k"] == 3


def test_generator_census_and_errors():
    G, truth = generate_planted_graph(PlantSpec(sources=1000, rate=0.9), seed=0)
    rec = truth["planted"][0]
    assert rec["source_matches"] == 1000 and rec["validated"] == 900 and rec["confidence"] == 0.9
    _, t1 = generate_planted_graph(PlantSpec(sources=50, rate=1.0), seed=1)
    assert t1["planted"][0]["confidence"] == 1.0
    for spec in (PlantSpec(rate=1.2), PlantSpec(sources=10, rate=0.5, tau=20), PlantSpec(sources=0)):
        with pytest.raises(SpecError):
            generate_planted_graph(spec)
    with pytest.raises(SpecError):
        generate_schema_graph(starved=9)
    with pytest.raises(SpecError):
        generate_hub_graph(rate=2)


def test_gen_is_byte_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        assert _run(["gen", "planted", "--out-dir", tmp_path / d, "--seed", 5, "--sources", 100,
                     "--noise-d", 50, "--noise-e", 20]) == 0
    capsys.readouterr()
    for name in ("nodes.csv", "edges.csv", "schema.json", "truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_discover_finds_planted_rule(planted, tmp_path):
    paths, truth = planted
    out, rep = tmp_path / "ggds.json", tmp_path / "report.json"
    assert _run(["discover", *_graph_argv(paths), "--tau", 20, "--out", out, "--report", rep]) == 0
    data = json.loads(out.read_text())
    want = truth["planted"][0]["confidence"]
    hits = [g for g in data["ggds"]
            if [n["label"] for n in g["source"]["pattern"]["nodes"]] == ["A", "B"]
            and sorted(n["label"] for n in g["target"]["pattern"]["nodes"]) == ["A", "B", "C"]
            and not g["source"]["constraints"]]
    assert hits and any(abs(g["confidence"] - want) < 1e-9 for g in hits)
    report = json.loads(rep.read_text())
    total = report["total_seconds"]
    assert abs(sum(report["stages_seconds"].values()) - total) <= 0.05 * total
    assert report["coverage"] == data["coverage"]


def test_discover_is_byte_deterministic(planted, tmp_path):
    paths, _ = planted
    outs = []
    for i in range(2):
        out = tmp_path / f"g{i}.json"
        assert _run(["discover", *_graph_argv(paths), "--tau", 20, "--out", out]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_validate_fixpoint_and_empty(planted, tmp_path):
    paths, _ = planted
    out = tmp_path / "g.json"
    assert _run(["discover", *_graph_argv(paths), "--tau", 20, "--out", out]) == 0
    rep = tmp_path / "v.json"
    assert _run(["validate", *_graph_argv(paths), "--ggds", out, "--out", rep]) == 0
    emitted = json.loads(out.read_text())["ggds"]
    checked = json.loads(rep.read_text())
    assert len(checked) == len(emitted)
    for g, r in zip(emitted, checked):
        assert r["support"] == g["support_source"]
        assert round(r["confidence"], 12) == g["confidence"]
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert _run(["validate", *_graph_argv(paths), "--ggds", empty, "--out", rep]) == 0
    assert json.loads(rep.read_text()) == []


def test_tau_above_everything_gives_empty_set(planted, tmp_path):
    paths, _ = planted
    out = tmp_path / "g.json"
    assert _run(["discover", *_graph_argv(paths), "--tau", 10**7, "--out", out]) == 0
    data = json.loads(out.read_text())
    assert data["ggds"] == [] and data["coverage"] == 0


def test_schema_command(tmp_path):
    G, truth = generate_schema_graph(per_label=30, seed=1)
    paths = write_generated(G, truth, tmp_path)
    out = tmp_path / "schema_report.json"
    dot = tmp_path / "schema.dot"
    assert _run(["schema", *_graph_argv(paths), "--truth", paths["truth"], "--tau", 20, "--out", out,
                 "--dot", dot]) == 0
    rep = json.loads(out.read_text())
    assert rep["recall"]["edge_recall"] == 1.0 and rep["recall"]["node_recall"] == 1.0
    assert dot.read_text().startswith("digraph")
    assert _run(["schema", *_graph_argv(paths), "--truth", paths["truth"], "--tau", 10**6, "--out", out]) == 0
    assert json.loads(out.read_text())["edge_triples"] == []


def test_stats_command(planted, tmp_path):
    paths, truth = planted
    out = tmp_path / "s.json"
    assert _run(["stats", *_graph_argv(paths), "--out", out]) == 0
    assert json.loads(out.read_text())["size"] == truth["census"]["size"]


def test_exit_codes(planted, tmp_path, monkeypatch, capsys):
    paths, _ = planted
    with pytest.raises(SystemExit) as info:
        _run(["discover", "--nodes", paths["nodes"]])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        _run(["frobnicate"])
    assert info.value.code == 1
    assert _run(["stats", "--nodes", tmp_path / "missing.csv", "--edges", paths["edges"]]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert _run(["discover", *_graph_argv(paths), "--config", bad]) == 2
    assert _run(["discover", *_graph_argv(paths), "--epsilon", 3]) == 2

    def boom(*a, **k):
        raise RuntimeError("invariant broken")

    monkeypatch.setattr(cli, "discover", boom)
    assert _run(["discover", *_graph_argv(paths), "--tau", 20]) == 3
    capsys.readouterr()
