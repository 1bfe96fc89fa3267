"""Candidate generation: level-wise pattern growth plus constraint expansion.

Vertical expansion grows patterns one frequent edge at a time; horizontal
expansion attaches differential-constraint sets to a pattern at the same
level.  Every lattice node with enough matches goes into the candidate
index.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping

from .answer_graph import (AnswerGraph, build_answer_graph, count_matches, create_answer_graph,
                           extend_answer_graph, filter_answer_graph)
from .constraints import VarEq, compatible, constraint_set, to_dict
from .discovery import (discover_constant_constraints, discover_equality_constraints,
                        discover_varpair_constraints, support_of)
from .graph import FrequentLabels, PropertyGraph, frequent_labels
from .index import Candidate, CandidateIndex
from .pattern import GraphPattern, canonical_form, enumerate_extensions
from .simindex import DEFAULT_BOUNDARIES, AttributePair, DecisionBoundary

logger = logging.getLogger(__name__)

LatticeNode = Candidate


def identity_key(Q: GraphPattern, phi) -> tuple:
    """DFS code plus the smallest constraint serialization over all code embeddings."""
    code, embs = canonical_form(Q)
    if not phi:
        return code, ()
    best = None
    for emb in embs:
        names = {v: f"n{i}" for v, i in emb.nodes}
        names.update({v: f"e{i}" for v, i in emb.edges})
        ser = tuple(sorted(json.dumps(_canon(to_dict(c.rename(names))), sort_keys=True) for c in phi))
        if best is None or ser < best:
            best = ser
    return code, best


def _canon(d: dict) -> dict:
    d = dict(d)
    d.pop("text", None)
    if d["type"] == "var" and (d["var"], d["attr"]) > (d["other"], d["other_attr"]):
        d["var"], d["other"] = d["other"], d["var"]
        d["attr"], d["other_attr"] = d["other_attr"], d["attr"]
        d["kind"], d["other_kind"] = d["other_kind"], d["kind"]
    if d["type"] == "eq" and d["var"] > d["other"]:
        d["var"], d["other"] = d["other"], d["var"]
    return d


@dataclass
class Settings:
    """What lattice construction needs beyond the graph."""

    tau: int
    k: int = 2
    boundaries: Mapping[str, DecisionBoundary] = field(default_factory=lambda: dict(DEFAULT_BOUNDARIES))
    pairs: list[AttributePair] = field(default_factory=list)
    important: set = field(default_factory=set)
    clusters: Mapping = field(default_factory=dict)
    max_constraints: int = 3
    discover_constraints: bool = True
    capacity: int = 7


class Lattice:
    def __init__(self):
        self.levels: dict[int, list[LatticeNode]] = {}
        self.by_key: dict[tuple, LatticeNode] = {}
        self.children: dict[int, list[int]] = {}

    def __len__(self):
        return len(self.by_key)

    def __iter__(self):
        for lvl in sorted(self.levels):
            yield from self.levels[lvl]

    def __contains__(self, key):
        return key in self.by_key

    def add(self, node: LatticeNode) -> bool:
        if node.key in self.by_key:
            return False
        self.by_key[node.key] = node
        self.levels.setdefault(node.level, []).append(node)
        if node.parent is not None:
            self.children.setdefault(node.parent.id, []).append(node.id)
        return True

    def patterns(self) -> list[LatticeNode]:
        """Nodes without constraints."""
        return [n for n in self if not n.constraints]

    def dump(self) -> list[dict]:
        return [{
            "id": n.id, "level": n.level, "code": [list(t) for t in n.key[0]],
            "pattern": str(n.pattern), "constraints": [str(c) for c in n.constraints],
            "support": n.support, "mni": n.mni,
        } for n in self]


class _Builder:
    def __init__(self, G: PropertyGraph, s: Settings, index: CandidateIndex | None = None):
        self.G = G
        self.s = s
        self.lattice = Lattice()
        self.index = index or CandidateIndex(s.capacity, len(G))
        self.next_id = 0
        self.masked: set[tuple[str, str, str]] = set()
        self.edge_labels: list[str] = []

    def _node(self, Q, phi, ag, level, parent, singles=()) -> LatticeNode | None:
        key = identity_key(Q, phi)
        if key in self.lattice:
            return None
        support = count_matches(ag)
        mni = min((len(v) for v in ag.nodes.values()), default=0)
        node = LatticeNode(self.next_id, Q, phi, ag, support, mni, level, parent, key, singles)
        self.next_id += 1
        self.lattice.add(node)
        if support >= self.s.tau:
            self.index.add_candidate(node)
        return node

    def _new_vars(self, node: LatticeNode) -> list[str]:
        Q = node.pattern
        if node.parent is None or not Q.edges:
            return Q.variables
        old = set(node.parent.pattern.variables)
        return [v for v in Q.variables if v not in old]

    def horizontal(self, node: LatticeNode):
        """Same-level children with constraint sets, singles first, then conjunctions."""
        if not self.s.discover_constraints:
            return
        Q, ag, tau = node.pattern, node.answer_graph, self.s.tau
        new_vars = self._new_vars(node)
        found: dict = {}
        # a child pattern keeps the parent's constraints where they still hold often enough
        if node.parent is not None:
            for c in node.parent.singles:
                if c not in found:
                    sup = support_of(ag, (c,))
                    if sup >= tau:
                        found[c] = sup
        for c, sup in discover_constant_constraints(Q, ag, new_vars, self.s.clusters, tau,
                                                    self.s.boundaries, self.s.important):
            found.setdefault(c, sup)
        for c, sup in discover_varpair_constraints(Q, ag, new_vars, self.s.pairs, tau, self.s.boundaries):
            found.setdefault(c, sup)
        for c, sup in discover_equality_constraints(Q, ag, tau):
            found.setdefault(c, sup)
        singles = constraint_set(found)
        node.singles = singles

        frontier: list[tuple[tuple, AnswerGraph, LatticeNode]] = []
        for c in singles:
            cag = filter_answer_graph(ag, (c,))
            child = self._node(Q, (c,), cag, node.level, node)
            if child is not None:
                frontier.append(((c,), cag, child))
        # apriori conjunctions; equalities do not count toward the cap
        size = 1
        while frontier and size < len(singles):
            size += 1
            nxt = []
            seen = set()
            for phi, cag, parent in frontier:
                for c in singles:
                    if c in phi:
                        continue
                    if _rank(c, singles) < _rank(phi[-1], singles):
                        continue
                    grown = constraint_set(phi + (c,))
                    if grown in seen or not compatible(grown):
                        continue
                    if sum(1 for x in grown if not isinstance(x, VarEq)) > self.s.max_constraints:
                        continue
                    # every subset one smaller must itself be a frequent node
                    if not all(identity_key(Q, sub) in self.lattice
                               for sub in combinations(grown, len(grown) - 1)):
                        continue
                    seen.add(grown)
                    gag = filter_answer_graph(cag, (c,))
                    if count_matches(gag) < self.s.tau:
                        continue
                    child = self._node(Q, grown, gag, node.level, parent)
                    if child is not None:
                        nxt.append((grown, gag, child))
            frontier = nxt

    def vertical(self, node: LatticeNode):
        if len(node.pattern.edges) >= self.s.k:
            return
        exts = enumerate_extensions(node.pattern, self.G, self.s.tau, self.edge_labels, frozenset(self.masked))
        for Q_ext in exts:
            key = identity_key(Q_ext, ())
            if key in self.lattice:
                continue
            ag = extend_answer_graph(self.G, node.answer_graph, Q_ext)
            child = self._node(Q_ext, (), ag, len(Q_ext.edges), node)
            if child is None:
                continue
            self.horizontal(child)
            self.vertical(child)

    def run(self, labels: FrequentLabels):
        self.edge_labels = sorted(labels.edge_labels)
        for lv in sorted(labels.node_labels):
            Q = GraphPattern.single(lv)
            ag = create_answer_graph(self.G, Q)
            root = self._node(Q, (), ag, 0, None)
            if root is None:
                continue
            self.horizontal(root)
            for le in list(self.edge_labels):
                exts = enumerate_extensions(Q, self.G, self.s.tau, [le], frozenset(self.masked))
                if not exts:
                    continue
                for Q_ext in exts:
                    if identity_key(Q_ext, ()) in self.lattice:
                        continue
                    child = self._node(Q_ext, (), extend_answer_graph(self.G, ag, Q_ext), 1, root)
                    if child is None:
                        continue
                    self.horizontal(child)
                    self.vertical(child)
                # every pattern with an lv-le-* edge has now been generated
                self.masked.update(_triples_at(self.G, lv, le))
        return self.lattice, self.index


def _rank(c, singles) -> int:
    return singles.index(c)


def _triples_at(G: PropertyGraph, lv: str, le: str) -> set[tuple[str, str, str]]:
    out = set()
    for j in G.edges_by_label.get(le, ()):
        s, d = G.node_label[G.edge_src[j]], G.node_label[G.edge_dst[j]]
        if s == lv or d == lv:
            out.add((s, le, d))
    return out


def construct_lattice(G: PropertyGraph, settings: Settings, labels: FrequentLabels | None = None,
                      index: CandidateIndex | None = None) -> tuple[Lattice, CandidateIndex]:
    """Build the lattice and register every frequent node in a candidate index."""
    if settings.tau < 1 or settings.k < 1:
        raise ValueError("tau and k must be >= 1")
    labels = labels or frequent_labels(G, settings.tau)
    return _Builder(G, settings, index).run(labels)


def vertical_expansion(node: LatticeNode, G: PropertyGraph, settings: Settings, lattice: Lattice,
                       index: CandidateIndex, edge_labels=None):
    """Grow ``node`` edge by edge up to ``settings.k`` edges, into ``lattice``/``index``."""
    b = _Builder(G, settings, index)
    b.lattice = lattice
    b.next_id = max((n.id for n in lattice), default=-1) + 1
    b.edge_labels = sorted(edge_labels if edge_labels is not None else frequent_labels(G, settings.tau).edge_labels)
    b.vertical(node)
    return lattice, index


def horizontal_expansion(node: LatticeNode, G: PropertyGraph, settings: Settings, lattice: Lattice,
                         index: CandidateIndex):
    b = _Builder(G, settings, index)
    b.lattice = lattice
    b.next_id = max((n.id for n in lattice), default=-1) + 1
    b.horizontal(node)
    return lattice, index


def candidate_for(G: PropertyGraph, Q: GraphPattern, phi=(), cid: int = -1) -> Candidate:
    """Stand-alone candidate for a pattern and constraint set (outside any lattice)."""
    phi = constraint_set(phi)
    ag = build_answer_graph(G, Q, phi)
    mni = min((len(v) for v in ag.nodes.values()), default=0)
    return Candidate(cid, Q, phi, ag, count_matches(ag), mni, len(Q.edges), None, identity_key(Q, phi))
