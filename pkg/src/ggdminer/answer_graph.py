"""Factorized match representation.

An :class:`AnswerGraph` keeps, for every node variable of a pattern, the
set of data nodes it can bind to, and for every edge variable, the set of
data edges.  Matches are the homomorphisms that stay inside those sets (and
satisfy any residual constraints).  Chains and stars are counted in closed
form, everything else by enumeration.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from math import prod
from typing import Mapping

from .constraints import VarEq, constraint_set, holds
from .graph import PropertyGraph
from .pattern import EDGE, NODE, GraphPattern, Match, PatternError, arc_consistent, search

logger = logging.getLogger(__name__)

CHAIN = "chain"
SNOWFLAKE = "snowflake"
OTHER = "other"


@dataclass(frozen=True)
class AnswerGraph:
    pattern: GraphPattern
    graph: PropertyGraph = field(repr=False, compare=False)
    nodes: Mapping[str, frozenset[int]]
    edges: Mapping[str, frozenset[int]]
    constraints: tuple = ()
    # constraints that candidate sets alone cannot express; checked per match
    residual: tuple = ()

    def edge_triples(self, var: str) -> list[tuple[int, int, int]]:
        G = self.graph
        return sorted((j, G.edge_src[j], G.edge_dst[j]) for j in self.edges[var])

    def is_empty(self) -> bool:
        return any(not s for s in self.nodes.values())

    def size(self) -> int:
        """Stored entries: candidate node ids plus edge ids."""
        return sum(map(len, self.nodes.values())) + sum(map(len, self.edges.values()))

    def summary(self) -> dict:
        return {
            "nodes": {v: len(s) for v, s in sorted(self.nodes.items())},
            "edges": {v: len(s) for v, s in sorted(self.edges.items())},
            "residual": [str(c) for c in self.residual],
        }

    def _replace(self, **kw) -> "AnswerGraph":
        data = dict(pattern=self.pattern, graph=self.graph, nodes=self.nodes, edges=self.edges,
                    constraints=self.constraints, residual=self.residual)
        data.update(kw)
        return AnswerGraph(**data)


def _freeze(nodes, edges):
    return ({v: frozenset(s) for v, s in nodes.items()}, {v: frozenset(s) for v, s in edges.items()})


def create_answer_graph(G: PropertyGraph, Q: GraphPattern, phi=()) -> AnswerGraph:
    """Answer graph of a single-node pattern: every node of its label passing ``phi``."""
    if Q.edges or len(Q.nodes) != 1:
        raise PatternError("create_answer_graph takes a single-node pattern; use extend_answer_graph")
    var, label = Q.nodes[0]
    ag = AnswerGraph(Q, G, {var: frozenset(G.nodes_by_label.get(label, ()))}, {})
    return filter_answer_graph(ag, phi) if phi else ag


def extend_answer_graph(G: PropertyGraph, ag: AnswerGraph, Q_ext: GraphPattern, phi_new=()) -> AnswerGraph:
    """Add the one pattern edge by which ``Q_ext`` extends ``ag.pattern``."""
    Q = ag.pattern
    new_edges = [e for e in Q_ext.edges if not Q.has_var(e.name)]
    if len(new_edges) != 1 or len(Q_ext.edges) != len(Q.edges) + 1:
        raise PatternError("Q_ext must add exactly one pattern edge")
    for v, lab in Q.nodes:
        if not Q_ext.has_var(v) or Q_ext.node_label(v) != lab:
            raise PatternError(f"Q_ext does not contain variable {v}")
    e = new_edges[0]
    if not (Q.has_var(e.src) or Q.has_var(e.dst)):
        raise PatternError("new edge is not incident to the existing pattern")
    lab_s, lab_d = Q_ext.node_label(e.src), Q_ext.node_label(e.dst)

    nodes = dict(ag.nodes)
    edges = dict(ag.edges)
    if Q.has_var(e.src):
        pool = (j for n in ag.nodes[e.src] for j in G.out_by_label[n].get(e.label, ()))
    else:
        pool = (j for n in ag.nodes[e.dst] for j in G.in_by_label[n].get(e.label, ()))
    src_set = ag.nodes.get(e.src)
    dst_set = ag.nodes.get(e.dst)
    keep = set()
    for j in pool:
        s, d = G.edge_src[j], G.edge_dst[j]
        if G.node_label[s] != lab_s or G.node_label[d] != lab_d:
            continue
        if src_set is not None and s not in src_set:
            continue
        if dst_set is not None and d not in dst_set:
            continue
        if e.src == e.dst and s != d:
            continue
        keep.add(j)
    edges[e.name] = frozenset(keep)
    if not Q.has_var(e.src):
        nodes[e.src] = frozenset(G.edge_src[j] for j in keep)
    if not Q.has_var(e.dst):
        nodes[e.dst] = frozenset(G.edge_dst[j] for j in keep)
    out = burn_back(ag._replace(pattern=Q_ext, nodes=nodes, edges=edges))
    if out.residual or not Q_ext.is_tree():
        # arc consistency is not enough here; keep only elements of real matches
        out = _tighten(out)
    return filter_answer_graph(out, phi_new) if phi_new else out


def build_answer_graph(G: PropertyGraph, Q: GraphPattern, phi=()) -> AnswerGraph:
    """Answer graph of any connected pattern, grown edge by edge."""
    if not Q.is_connected():
        raise PatternError("pattern is disconnected")
    start = Q.nodes[0][0]
    cur = GraphPattern(((start, Q.node_label(start)),))
    ag = create_answer_graph(G, cur)
    bound = {start}
    remaining = list(Q.edges)
    while remaining:
        e = next(e for e in remaining if e.src in bound or e.dst in bound)
        remaining.remove(e)
        nodes = list(cur.nodes)
        for v in (e.src, e.dst):
            if v not in bound:
                nodes.append((v, Q.node_label(v)))
                bound.add(v)
        cur = GraphPattern(tuple(nodes), cur.edges + (e,))
        ag = extend_answer_graph(G, ag, cur)
    # keep the caller's variable order
    ag = ag._replace(pattern=Q)
    return filter_answer_graph(ag, phi) if phi else ag


def burn_back(ag: AnswerGraph) -> AnswerGraph:
    """Remove candidates that lost support in an incident pattern edge, to fixpoint."""
    nodes, edges = arc_consistent(ag.pattern, ag.graph, ag.nodes, ag.edges)
    nodes, edges = _freeze(nodes, edges)
    return ag._replace(nodes=nodes, edges=edges)


def _adjacent_edge(Q: GraphPattern, u: str, v: str):
    for e in Q.edges:
        if (e.src, e.dst) in ((u, v), (v, u)):
            return e
    return None


def filter_answer_graph(ag: AnswerGraph, phi) -> AnswerGraph:
    """Drop candidates violating ``phi``, then burn back.

    Unary constraints prune candidate sets; binary constraints between
    adjacent variables prune the connecting edge's candidates.  Anything
    else is kept as a residual predicate and enforced per match.
    """
    Q, G = ag.pattern, ag.graph
    for c in phi:
        for v in c.variables:
            if not Q.has_var(v):
                raise PatternError(f"constraint {c} references unknown variable {v}")
    if not phi:
        return ag
    nodes = {v: set(s) for v, s in ag.nodes.items()}
    edges = {v: set(s) for v, s in ag.edges.items()}
    residual = list(ag.residual)

    def cands(var):
        return nodes[var] if Q.kind(var) == NODE else edges[var]

    for c in phi:
        vs = c.variables
        if len(vs) == 1:
            (var,) = vs
            if isinstance(c, VarEq):
                continue
            pool = cands(var)
            pool.intersection_update({x for x in pool if holds(c, G, {var: x})})
            continue
        u, v = vs
        ku, kv = Q.kind(u), Q.kind(v)
        if ku == NODE and kv == NODE:
            e = _adjacent_edge(Q, u, v)
            if e is None:
                residual.append(c)
                continue
            keep = set()
            for j in edges[e.name]:
                m = {e.src: G.edge_src[j], e.dst: G.edge_dst[j]}
                if holds(c, G, m):
                    keep.add(j)
            edges[e.name] = keep
        elif ku == EDGE and kv == EDGE:
            residual.append(c)
        else:
            evar, nvar = (u, v) if ku == EDGE else (v, u)
            e = Q.edge(evar)
            if nvar not in (e.src, e.dst) or isinstance(c, VarEq):
                residual.append(c)
                continue
            end = G.edge_src if nvar == e.src else G.edge_dst
            keep = {j for j in edges[evar] if holds(c, G, {evar: j, nvar: end[j]})}
            edges[evar] = keep

    out = ag._replace(
        nodes={v: frozenset(s) for v, s in nodes.items()},
        edges={v: frozenset(s) for v, s in edges.items()},
        constraints=constraint_set(ag.constraints + tuple(phi)),
        residual=constraint_set(residual),
    )
    out = burn_back(out)
    if out.residual or not Q.is_tree() and Q.edges:
        out = _tighten(out)
    return out


def _tighten(ag: AnswerGraph) -> AnswerGraph:
    """Shrink candidates to the elements of matches that pass the residual checks."""
    nodes = {v: set() for v in ag.nodes}
    edges = {v: set() for v in ag.edges}
    for m in defactorize(ag):
        for v in nodes:
            nodes[v].add(m[v])
        for v in edges:
            edges[v].add(m[v])
    nodes, edges = _freeze(nodes, edges)
    return ag._replace(nodes=nodes, edges=edges)


@dataclass(frozen=True)
class ShapeClass:
    kind: str
    order: tuple[str, ...] = ()   # chain: node variables along the path
    center: str | None = None     # snowflake: the hub variable


def classify_shape(Q: GraphPattern) -> ShapeClass:
    if not Q.edges:
        return ShapeClass(CHAIN, (Q.nodes[0][0],))
    if not Q.is_tree():
        return ShapeClass(OTHER)
    deg: dict[str, int] = defaultdict(int)
    adj: dict[str, list[str]] = defaultdict(list)
    for e in Q.edges:
        deg[e.src] += 1
        deg[e.dst] += 1
        adj[e.src].append(e.dst)
        adj[e.dst].append(e.src)
    if max(deg.values()) <= 2:
        ends = sorted(v for v in Q.node_vars if deg[v] == 1)
        order = [ends[0]]
        prev = None
        while len(order) < len(Q.nodes):
            nxt = next(w for w in adj[order[-1]] if w != prev)
            prev = order[-1]
            order.append(nxt)
        return ShapeClass(CHAIN, tuple(order))
    hubs = [v for v in Q.node_vars if deg[v] == len(Q.edges)]
    if hubs:
        return ShapeClass(SNOWFLAKE, center=hubs[0])
    return ShapeClass(OTHER)


def _check(ag: AnswerGraph):
    if not ag.residual:
        return None
    G, res = ag.graph, ag.residual
    return lambda m: all(holds(c, G, m) for c in res)


def defactorize(ag: AnswerGraph) -> list[Match]:
    """Explicit list of the matches an answer graph represents."""
    if ag.is_empty():
        return []
    return list(search(ag.pattern, ag.graph, dict(ag.nodes), dict(ag.edges), check=_check(ag)))


def _count_chain(ag: AnswerGraph, order) -> int:
    G, Q = ag.graph, ag.pattern
    if len(order) == 1:
        return len(ag.nodes[order[0]])
    weight = {n: 1 for n in ag.nodes[order[-1]]}
    for i in range(len(order) - 1, 0, -1):
        left, right = order[i - 1], order[i]
        e = _adjacent_edge(Q, left, right)
        forward = e.src == left
        nxt: dict[int, int] = defaultdict(int)
        for j in ag.edges[e.name]:
            a, b = (G.edge_src[j], G.edge_dst[j]) if forward else (G.edge_dst[j], G.edge_src[j])
            w = weight.get(b)
            if w:
                nxt[a] += w
        weight = nxt
    return sum(weight.get(n, 0) for n in ag.nodes[order[0]])


def _count_snowflake(ag: AnswerGraph, center: str) -> int:
    G, Q = ag.graph, ag.pattern
    per_edge = []
    for e in Q.edges:
        end = G.edge_src if e.src == center else G.edge_dst
        cnt: dict[int, int] = defaultdict(int)
        for j in ag.edges[e.name]:
            cnt[end[j]] += 1
        per_edge.append(cnt)
    return sum(prod(c.get(n, 0) for c in per_edge) for n in ag.nodes[center])


def count_matches(ag: AnswerGraph) -> int:
    """Exact number of homomorphic matches represented by ``ag``."""
    if ag.is_empty():
        return 0
    shape = classify_shape(ag.pattern)
    if not ag.residual:
        if shape.kind == CHAIN:
            return _count_chain(ag, shape.order)
        if shape.kind == SNOWFLAKE:
            return _count_snowflake(ag, shape.center)
    logger.debug("count_matches: enumerating %s pattern (%d residual)", shape.kind, len(ag.residual))
    return sum(1 for _ in search(ag.pattern, ag.graph, dict(ag.nodes), dict(ag.edges), check=_check(ag)))


def covered_elements(ag: AnswerGraph) -> set[int]:
    """Graph elements (node ids, then offset edge ids) in the answer graph."""
    G = ag.graph
    out: set[int] = set()
    for s in ag.nodes.values():
        out.update(s)
    off = G.num_nodes
    for s in ag.edges.values():
        out.update(off + j for j in s)
    return out


def restrict(ag: AnswerGraph, nodes: Mapping[str, frozenset] = None,
             edges: Mapping[str, frozenset] = None) -> AnswerGraph:
    """Intersect some candidate sets with the given ones and burn back."""
    n = dict(ag.nodes)
    e = dict(ag.edges)
    for v, s in (nodes or {}).items():
        n[v] = n[v] & s
    for v, s in (edges or {}).items():
        e[v] = e[v] & s
    return burn_back(ag._replace(nodes=n, edges=e))
