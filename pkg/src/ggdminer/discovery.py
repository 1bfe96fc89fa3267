"""Mining differential constraints over the matches held by an answer graph.

Each routine returns ``(constraint, support)`` pairs where support is the
exact number of matches of the filtered answer graph, and only pairs with
support ``>= tau`` are returned.
"""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations
from typing import Mapping

from .answer_graph import AnswerGraph, count_matches, defactorize, filter_answer_graph
from .constraints import VarConst, VarEq, VarVar, choose_pivot, find_intervals
from .graph import STRING
from .pattern import EDGE, NODE, GraphPattern
from .simindex import (DEFAULT_BOUNDARIES, AttributePair, DecisionBoundary, SimilarityCluster, distance,
                       edit_distance, within_edit_distance)


def support_of(ag: AnswerGraph, constraints) -> int:
    return count_matches(filter_answer_graph(ag, tuple(constraints)))


def _gate(ag, found, tau):
    out = []
    seen = set()
    for c in found:
        if c in seen:
            continue
        seen.add(c)
        sup = support_of(ag, (c,))
        if sup >= tau:
            out.append((c, sup))
    return out


def _candidates(ag: AnswerGraph, var: str):
    return ag.nodes[var] if ag.pattern.kind(var) == NODE else ag.edges[var]


def discover_constant_constraints(Q: GraphPattern, ag: AnswerGraph, new_vars, clusters: Mapping,
                                  tau: int, boundaries: Mapping[str, DecisionBoundary] = DEFAULT_BOUNDARIES,
                                  important=None) -> list[tuple[VarConst, int]]:
    """``delta(x.A, c) <= t`` for important attributes of the new variables.

    ``clusters`` maps ``(kind, label, attribute)`` to the pre-built
    similarity clusters.  ``important`` defaults to the keys of ``clusters``.
    """
    G = ag.graph
    keys = set(clusters) if important is None else {tuple(r) for r in important}
    found = []
    for var in new_vars:
        kind, label = Q.kind(var), Q.label(var)
        cands = _candidates(ag, var)
        if not cands:
            continue
        for ref in sorted(r for r in keys if r[0] == kind and r[1] == label):
            attr = ref[2]
            domain = G.schema.domain(kind, label, attr) or STRING
            boundary = boundaries[domain]
            cl: SimilarityCluster
            for cl in clusters.get(ref, ()):
                present = {v: [o for o in owners if o in cands] for v, owners in cl.members.items()}
                present = {v: os for v, os in present.items() if os}
                if sum(map(len, present.values())) < tau:
                    continue
                pivot = choose_pivot(list(present), domain)
                dissims = [(o, distance(domain, v, pivot)) for v, os in present.items() for o in os]
                for iv in find_intervals(dissims, boundary, tau):
                    found.append(VarConst(var, attr, pivot, iv.threshold, domain, kind))
    return _gate(ag, found, tau)


def _endpoint_edge(Q: GraphPattern, u: str, w: str):
    """An edge variable through which both ``u`` and ``w`` are bound by one data edge."""
    ku, kw = Q.kind(u), Q.kind(w)
    if ku == NODE and kw == NODE:
        for e in Q.edges:
            if (e.src, e.dst) in ((u, w), (w, u)):
                return e
        return None
    if ku == EDGE and kw == EDGE:
        return None
    evar, nvar = (u, w) if ku == EDGE else (w, u)
    e = Q.edge(evar)
    return e if nvar in (e.src, e.dst) else None


def _pair_values(ag: AnswerGraph, u, attr_u, w, attr_w):
    """(witness, value of u.attr_u, value of w.attr_w) for realized bindings.

    Adjacent variables are read off the connecting edge candidates; others
    need the explicit matches.
    """
    G, Q = ag.graph, ag.pattern
    e = _endpoint_edge(Q, u, w)
    if e is not None:
        for j in sorted(ag.edges[e.name]):
            m = {e.name: j, e.src: G.edge_src[j], e.dst: G.edge_dst[j]}
            yield j, G.value(Q.kind(u), m[u], attr_u), G.value(Q.kind(w), m[w], attr_w)
        return
    for i, m in enumerate(defactorize(ag)):
        yield i, G.value(Q.kind(u), m[u], attr_u), G.value(Q.kind(w), m[w], attr_w)


def _var_refs(Q: GraphPattern, ref):
    kind, label, _ = ref
    return [v for v in Q.variables if Q.kind(v) == kind and Q.label(v) == label]


def _close(domain, a, b, radius):
    """Distance of ``a`` and ``b`` if it is at most ``radius``, else None."""
    if a is None or b is None:
        return None
    if domain == STRING:
        if not isinstance(a, str) or not isinstance(b, str):
            return None
        if not within_edit_distance(a, b, int(radius)):
            return None
        return edit_distance(a, b)
    try:
        d = distance(domain, a, b)
    except TypeError:
        return None
    return d if d <= radius else None


def discover_varpair_constraints(Q: GraphPattern, ag: AnswerGraph, new_vars, pairs: list[AttributePair],
                                 tau: int, boundaries: Mapping[str, DecisionBoundary] = DEFAULT_BOUNDARIES
                                 ) -> list[tuple[VarVar, int]]:
    """``delta(x.A, y.B) <= t`` for selected attribute pairs touching a new variable."""
    new_vars = set(new_vars)
    found = []
    for p in pairs:
        boundary = boundaries[p.domain]
        # same reach as a similarity cluster: two values within upsilon of one pivot
        radius = 2 * boundary.upsilon
        seen_vars = set()
        for u0 in _var_refs(Q, p.first):
            for w0 in _var_refs(Q, p.second):
                if u0 == w0 or not ({u0, w0} & new_vars):
                    continue
                u, w = u0, w0
                if p.first == p.second:
                    u, w = sorted((u0, w0))
                    if (u, w) in seen_vars:
                        continue
                    seen_vars.add((u, w))
                dissims = []
                for wit, a, b in _pair_values(ag, u, p.attr_a, w, p.attr_b):
                    d = _close(p.domain, a, b, radius)
                    if d is not None:
                        dissims.append((wit, d))
                for iv in find_intervals(dissims, boundary, tau):
                    found.append(VarVar(u, p.attr_a, w, p.attr_b, iv.threshold, p.domain,
                                        Q.kind(u), Q.kind(w)))
    return _gate(ag, found, tau)


def discover_equality_constraints(Q: GraphPattern, ag: AnswerGraph, tau: int) -> list[tuple[VarEq, int]]:
    """``x == x'`` for same-label node variables bound to one node often enough."""
    by_label = defaultdict(list)
    for v, lab in Q.nodes:
        by_label[lab].append(v)
    found = []
    for lab in sorted(by_label):
        for u, w in combinations(sorted(by_label[lab]), 2):
            if ag.nodes[u] & ag.nodes[w]:
                found.append(VarEq(u, w, NODE))
    return _gate(ag, found, tau)
