import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ggdminer.constraints import VarConst, VarVar
from ggdminer.extraction import (GGD, GGDSet, ValidationError, VariableMapping, confidence, confidence_benchmark,
                                 coverage, find_mappings, schema_graph, table_validated_count, validate_ggd,
                                 validated_count)
from ggdminer.graph import Edge, Node, PropertyGraph
from ggdminer.lattice import candidate_for
from ggdminer.pattern import GraphPattern

from oracles import brute_confidence, brute_mappings, random_graph, random_pattern

seeds = st.integers(0, 10**6)
ATTRS = {"p": lambda r: r.choice(["aa", "ab", "bb"])}


def _random_constraints(rng, Q):
    out = []
    if rng.random() < 0.5:
        out.append(VarConst(rng.choice(Q.node_vars), "p", "aa", rng.choice([0, 1])))
    if rng.random() < 0.3 and len(Q.node_vars) > 1:
        a, b = rng.sample(Q.node_vars, 2)
        out.append(VarVar(a, "p", b, "p", 0))
    return out


@settings(max_examples=80, deadline=None)
@given(seeds, seeds)
def test_find_mappings_equals_brute_force(s1, s2):
    P = random_pattern(random.Random(s1), 3)
    R = random_pattern(random.Random(s2), 3)
    G = PropertyGraph([], [])
    src, tgt = candidate_for(G, P, (), 0), candidate_for(G, R, (), 1)
    got = {vm.pairs for vm in find_mappings(src, tgt, max_mappings=10**6)}
    assert got == brute_mappings(P, R)


def test_find_mappings_cap_and_order():
    G = PropertyGraph([], [])
    P = GraphPattern.single("A").add_edge("x0", None, "r", "A")
    R = GraphPattern.single("A").add_edge("x0", None, "r", "A").add_edge("x1", None, "r", "A")
    ms = find_mappings(candidate_for(G, P), candidate_for(G, R), max_mappings=1)
    assert len(ms) == 1 and len(ms[0]) == 3
    assert find_mappings(candidate_for(G, GraphPattern.single("A")), candidate_for(G, GraphPattern.single("B"))) == []


def test_variable_mapping_validation():
    with pytest.raises(ValueError):
        VariableMapping(())
    with pytest.raises(ValueError):
        VariableMapping((("a", "x"), ("b", "x")))


def confidence_instances(seed):
    rng = random.Random(seed)
    G = random_graph(rng, rng.randint(4, 12), rng.randint(4, 24), attrs=ATTRS)
    P = random_pattern(rng, 2)
    R = random_pattern(rng, 3)
    src = candidate_for(G, P, _random_constraints(rng, P), 0)
    tgt = candidate_for(G, R, _random_constraints(rng, R), 1)
    return G, src, tgt


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_confidence_equals_double_enumeration(seed):
    G, src, tgt = confidence_instances(seed)
    if src.support == 0:
        with pytest.raises(ValueError):
            confidence(src, tgt, VariableMapping((("x0", "x0"),)), G)
        return
    for mp in find_mappings(src, tgt):
        want = brute_confidence(src.pattern, src.constraints, tgt.pattern, tgt.constraints, mp.as_dict(), G)
        assert confidence(src, tgt, mp, G) == want
        assert validated_count(src, tgt, mp) == table_validated_count(src, tgt, mp)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_self_confidence_is_one(seed):
    G, src, _ = confidence_instances(seed)
    if src.support == 0:
        return
    ident = VariableMapping.of({v: v for v in src.pattern.variables})
    assert confidence(src, src, ident, G) == 1.0


@pytest.fixture
def small():
    # 5 nodes: two A->B pairs, one of the Bs continues to C
    nodes = [Node("a1", "A", {"n": "x"}), Node("a2", "A", {"n": "y"}), Node("b1", "B"), Node("b2", "B"),
             Node("c1", "C")]
    edges = [Edge("r1", "a1", "b1", "r"), Edge("r2", "a2", "b2", "r"), Edge("s1", "b1", "c1", "s")]
    return PropertyGraph(nodes, edges)


def _rule(small):
    ab = GraphPattern.single("A").add_edge("x0", None, "r", "B")
    abc = ab.add_edge("x1", None, "s", "C")
    src, tgt = candidate_for(small, ab, (), 0), candidate_for(small, abc, (), 1)
    mp = VariableMapping.of({"x0": "x0", "x1": "x1", "e0": "e0"})
    return src, tgt, mp


def test_validate_lists_violations(small):
    src, tgt, mp = _rule(small)
    g = GGD(src, tgt, mp, src.support, tgt.support, confidence(src, tgt, mp, small))
    assert g.confidence == 0.5
    rep = validate_ggd(small, g.to_dict())
    assert rep.support == 2 and rep.confidence == 0.5
    assert rep.violations == [{"e0": "r2", "x0": "a2", "x1": "b2"}]


def test_validate_rejects_unknown_refs(small):
    src, tgt, mp = _rule(small)
    d = GGD(src, tgt, mp, 2, 1, 0.5).to_dict()
    bad = json.loads(json.dumps(d))
    bad["target"]["pattern"]["nodes"][2]["label"] = "Zebra"
    with pytest.raises(ValidationError):
        validate_ggd(small, bad)
    bad = json.loads(json.dumps(d))
    bad["source"]["constraints"] = [{"type": "const", "var": "x0", "attr": "missing", "constant": "x",
                                     "threshold": 0}]
    with pytest.raises(ValidationError):
        validate_ggd(small, bad)


def test_ggd_rendering_and_renaming(small):
    src, tgt, mp = _rule(small)
    g = GGD(src, tgt, mp, 2, 1, 0.5)
    assert g.renaming() == {"x0": "x0", "x1": "x1", "x2": "y0", "e0": "e0", "e1": "f0"}
    d = g.to_dict()
    assert d["mapping"] == {"e0": "e0", "x0": "x0", "x1": "x1"}
    assert [n["var"] for n in d["target"]["pattern"]["nodes"]] == ["x0", "x1", "y0"]
    assert "conf=0.5000" in str(g)


def test_coverage_and_schema(small):
    src, tgt, mp = _rule(small)
    g = GGD(src, tgt, mp, 2, 1, 0.5)
    assert coverage([g], small) == 6 / 8
    assert coverage([], small) == 0.0
    sg = schema_graph([g])
    assert sg.triples() == [["A", "r", "B"], ["B", "s", "C"]]
    assert sg.recall(["A", "B", "C", "D"], [["A", "r", "B"]])["node_recall"] == 0.75
    assert 'digraph schema' in sg.to_dot()
    s = GGDSet([g], {"k": 1}, 0.75)
    assert json.loads(s.to_json())["coverage"] == 0.75


def test_benchmark_paths_agree(small):
    src, tgt, mp = _rule(small)
    b = confidence_benchmark(src, tgt, mp)
    assert b["validated"] == 1 and b["matches"] == 2
