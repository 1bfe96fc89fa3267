import random

import pytest
from hypothesis import given, settings, strategies as st

from ggdminer.constraints import VarConst, VarEq, VarVar
from ggdminer.index import (CandidateIndex, NotIndexedError, build_knn_graph, delta, delta_similarity, exact_knn,
                            nn_descent, search_targets)
from ggdminer.lattice import candidate_for

from oracles import random_graph, random_pattern

seeds = st.integers(0, 10**6)


def random_constraints(rng, Q):
    out = []
    for _ in range(rng.randint(0, 3)):
        v = rng.choice(Q.node_vars)
        r = rng.random()
        if r < 0.4:
            out.append(VarConst(v, rng.choice("pq"), rng.choice(["a", "b"]), rng.choice([1, 2])))
        elif r < 0.8:
            out.append(VarVar(v, rng.choice("pq"), rng.choice(Q.node_vars), "p", 1))
        elif len(Q.node_vars) > 1:
            a, b = rng.sample(Q.node_vars, 2)
            out.append(VarEq(*sorted((a, b))))
    return out


def random_pool(rng, n, G=None):
    G = G or random_graph(rng, 12, 30)
    pool = []
    for i in range(n):
        Q = random_pattern(rng, 3)
        pool.append(candidate_for(G, Q, random_constraints(rng, Q), i))
    return G, pool


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_delta_properties(seed):
    rng = random.Random(seed)
    _, pool = random_pool(rng, 50)
    for _ in range(50):
        a, b = rng.choice(pool), rng.choice(pool)
        s = delta_similarity(a, b)
        assert 0 <= s.delta_q <= 1 and 0 <= s.delta_phi <= 1
        assert delta(a, b) == delta(b, a)
        assert 0 <= delta(a, b) <= 1
    for a in pool:
        assert delta(a, a) == 1


def test_delta_hand_computed():
    G = random_graph(random.Random(1), 10, 20)
    from ggdminer.pattern import GraphPattern
    ab = GraphPattern.single("A").add_edge("x0", None, "r", "B")
    abc = ab.add_edge("x1", None, "s", "A")
    c1 = candidate_for(G, ab, [VarConst("x0", "p", "a", 1)], 0)
    c2 = candidate_for(G, abc, [VarConst("x0", "p", "b", 2), VarVar("x0", "p", "x1", "q", 1)], 1)
    # one shared triple out of max(1, 2); one shared constraint signature out of max(1, 2)
    assert delta_similarity(c1, c2).delta_q == 0.5
    assert delta_similarity(c1, c2).delta_phi == 0.5
    assert delta(c1, c2) == 0.5


def _all_pairs_topk(pool, k):
    out = {}
    for a in pool:
        scores = sorted(((b.id, delta(a, b)) for b in pool if b is not a), key=lambda p: (-p[1], p[0]))
        out[a.id] = scores[:k]
    return out


@pytest.mark.parametrize("seed", range(3))
def test_exact_knn_is_all_pairs(seed):
    rng = random.Random(seed)
    _, pool = random_pool(rng, 120)
    assert exact_knn(pool, 5) == _all_pairs_topk(pool, 5)
    assert build_knn_graph(pool, 5) == _all_pairs_topk(pool, 5)


def test_nn_descent_recall():
    rng = random.Random(4)
    _, pool = random_pool(rng, 150)
    approx = nn_descent(pool, 6, seed=1)
    exact = exact_knn(pool, 6)
    # compare neighbour quality by score, since ties make ids ambiguous
    hits = total = 0
    for cid, nbrs in exact.items():
        worst = nbrs[-1][1]
        got = approx[cid]
        hits += sum(1 for _, d in got if d >= worst)
        total += len(nbrs)
    assert hits / total >= 0.8
    assert nn_descent(pool, 6, seed=1) == approx


def _indexed(seed, n=60, k_g=3):
    rng = random.Random(seed)
    G, pool = random_pool(rng, n)
    idx = CandidateIndex(7, len(G))
    for c in pool:
        idx.add_candidate(c)
    idx.build_knn(k_g)
    return idx, pool


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(0, 3), st.floats(0, 1))
def test_search_targets_bounded(seed, m, theta):
    idx, pool = _indexed(seed)
    for u in pool[:10]:
        got = search_targets(idx, u, theta, m)
        assert len(got) <= 3 ** m
        assert u not in got
        for t in got:
            assert theta <= delta(u, t) < 1


def test_search_errors():
    idx, pool = _indexed(0)
    from ggdminer.index import Candidate
    stranger = Candidate(999, pool[0].pattern, (), pool[0].answer_graph, 1)
    with pytest.raises(NotIndexedError):
        search_targets(idx, stranger, 0.5, 2)
    fresh = CandidateIndex(7, 10)
    fresh.add_candidate(pool[0])
    fresh.add_candidate(pool[1])
    with pytest.raises(ValueError):
        search_targets(fresh, pool[0], 0.5, 2)


def test_source_set_greedy_rules():
    rng = random.Random(5)
    G, pool = random_pool(rng, 80)
    idx = CandidateIndex(3, len(G))
    for c in pool:
        before = idx.covered()
        joined = idx.add_candidate(c)
        if not (c.covered - before):
            assert not joined
        assert len(idx.sources) <= 3
        # every member contributes something nobody else covers
        for s in idx.sources:
            others = set().union(*(o.covered for o in idx.sources if o is not s))
            assert s.covered - others
        assert idx.covered() == set().union(*(s.covered for s in idx.sources)) if idx.sources else True
    assert 0 <= idx.coverage() <= 1
    with pytest.raises(ValueError):
        idx.add_candidate(pool[0])
    with pytest.raises(ValueError):
        CandidateIndex(0)


def test_dump_lists_every_candidate():
    idx, pool = _indexed(2, 20)
    d = idx.dump()
    assert [r["id"] for r in d] == [c.id for c in pool]
    assert sum(r["source"] for r in d) == len(idx.sources)
