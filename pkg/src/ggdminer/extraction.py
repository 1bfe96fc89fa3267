"""Pairing candidates into GGDs, plus coverage, schema recovery and validation."""

from __future__ import annotations

import json
import time
import tracemalloc
from dataclasses import dataclass, field
from itertools import product

from .answer_graph import AnswerGraph, count_matches, defactorize, restrict
from .constraints import from_dict as constraint_from_dict
from .constraints import holds, to_dict as constraint_to_dict
from .graph import PropertyGraph
from .index import Candidate, CandidateIndex, search_targets
from .pattern import EDGE, NODE, GraphPattern, Match, search

MAX_VIOLATIONS = 10


class ValidationError(ValueError):
    """A GGD refers to labels or attributes the graph does not have."""


@dataclass(frozen=True)
class VariableMapping:
    """Source variable -> target variable, for node and edge variables."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("a variable mapping must be non-empty")
        src = [a for a, _ in self.pairs]
        dst = [b for _, b in self.pairs]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ValueError("a variable mapping must be injective")

    @classmethod
    def of(cls, m: dict) -> "VariableMapping":
        return cls(tuple(sorted(m.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __str__(self):
        return "{" + ", ".join(f"{a}->{b}" for a, b in self.pairs) + "}"


def _edge_options(Q_s: GraphPattern, Q_t: GraphPattern, node_map: dict):
    """Per source edge inside the mapped node set: target edges it may map to."""
    opts = []
    for e in Q_s.edges:
        if e.src in node_map and e.dst in node_map:
            ts, td = node_map[e.src], node_map[e.dst]
            cands = [f.name for f in Q_t.edges if f.label == e.label and f.src == ts and f.dst == td]
            if not cands:
                return None
            opts.append((e.name, cands))
    return opts


def _connected(Q: GraphPattern, vars_: set[str]) -> bool:
    if not vars_:
        return False
    adj = {v: set() for v in vars_}
    for e in Q.edges:
        if e.src in vars_ and e.dst in vars_:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    start = min(vars_)
    seen, stack = {start}, [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vars_


def _node_maps(Q_s: GraphPattern, Q_t: GraphPattern) -> list[dict]:
    """Every injective, label-preserving, edge-consistent partial node mapping."""
    tlab = dict(Q_t.nodes)
    svars = Q_s.node_vars
    out = []

    def rec(i, cur, used):
        if i == len(svars):
            if cur and _edge_options(Q_s, Q_t, cur) is not None:
                out.append(dict(cur))
            return
        v = svars[i]
        rec(i + 1, cur, used)
        for w in Q_t.node_vars:
            if w in used or tlab[w] != Q_s.node_label(v):
                continue
            cur[v] = w
            # prune early on edges whose endpoints are both decided
            if _edge_options(Q_s, Q_t, cur) is not None:
                rec(i + 1, cur, used | {w})
            del cur[v]

    rec(0, {}, frozenset())
    return out


def find_mappings(src: Candidate, tgt: Candidate, max_mappings: int = 10) -> list[VariableMapping]:
    """Inclusion-maximal connected variable mappings from ``src`` into ``tgt``.

    Node variables map injectively onto same-label target variables; a
    source edge whose endpoints are both mapped must map to a target edge
    with the same label and direction between the images.  The mapped
    source variables must form a connected piece of the source pattern.
    """
    Q_s, Q_t = _pattern(src), _pattern(tgt)
    node_maps = [m for m in _node_maps(Q_s, Q_t) if _connected(Q_s, set(m))]
    items = [frozenset(m.items()) for m in node_maps]
    maximal = [m for m, it in zip(node_maps, items) if not any(it < other for other in items)]
    found = set()
    for nm in maximal:
        opts = _edge_options(Q_s, Q_t, nm)
        names = [n for n, _ in opts]
        for choice in product(*[c for _, c in opts]):
            if len(set(choice)) != len(choice):
                continue
            full = dict(nm)
            full.update(zip(names, choice))
            found.add(VariableMapping.of(full))
    ordered = sorted(found, key=lambda vm: (-len(vm), vm.pairs))
    return ordered[:max_mappings]


def _pattern(c) -> GraphPattern:
    return c.pattern if hasattr(c, "pattern") else c


def _ag(c) -> AnswerGraph:
    return c.answer_graph if hasattr(c, "answer_graph") else c


def _fast_path_ok(tgt_ag: AnswerGraph, mapping: dict) -> bool:
    """Whether candidate-set intersection alone decides validation exactly.

    Holds for a tree-shaped target without residual constraints whose mapped
    part is a connected subtree made of mapped edges: every consistent
    binding of that subtree then extends to a full target match.
    """
    Q_t = tgt_ag.pattern
    if tgt_ag.residual or not Q_t.is_tree():
        return False
    images = set(mapping.values())
    t_nodes = {v for v in images if Q_t.kind(v) == NODE}
    if not t_nodes:
        return False
    for e in Q_t.edges:
        if e.src in t_nodes and e.dst in t_nodes and e.name not in images:
            return False
    return _connected(Q_t, t_nodes)


def _restricted(src_ag: AnswerGraph, tgt_ag: AnswerGraph, mapping: dict) -> AnswerGraph:
    Q_s = src_ag.pattern
    nodes = {s: tgt_ag.nodes[t] for s, t in mapping.items() if Q_s.kind(s) == NODE}
    edges = {s: tgt_ag.edges[t] for s, t in mapping.items() if Q_s.kind(s) == EDGE}
    return restrict(src_ag, nodes, edges)


def _target_projections(tgt_ag: AnswerGraph, targets: tuple[str, ...]) -> set[tuple]:
    return {tuple(m[t] for t in targets) for m in defactorize(tgt_ag)}


def validated_count(src, tgt, mapping: VariableMapping) -> int:
    """Source matches that some target match agrees with on every mapped variable."""
    src_ag, tgt_ag = _ag(src), _ag(tgt)
    mp = mapping.as_dict()
    if src_ag.is_empty() or tgt_ag.is_empty():
        return 0
    restricted = _restricted(src_ag, tgt_ag, mp)
    if restricted.is_empty():
        return 0
    if _fast_path_ok(tgt_ag, mp):
        return count_matches(restricted)
    s_vars = tuple(sorted(mp))
    t_vars = tuple(mp[s] for s in s_vars)
    allowed = _target_projections(tgt_ag, t_vars)
    G, res = restricted.graph, restricted.residual

    def check(m):
        if res and not all(holds(c, G, m) for c in res):
            return False
        return tuple(m[s] for s in s_vars) in allowed

    return sum(1 for _ in search(restricted.pattern, G, dict(restricted.nodes), dict(restricted.edges),
                                 check=check))


def confidence(src, tgt, mapping: VariableMapping, G: PropertyGraph | None = None) -> float:
    """Fraction of source matches extended by a target match through ``mapping``."""
    total = src.support if hasattr(src, "support") else count_matches(_ag(src))
    if total == 0:
        raise ValueError("confidence is undefined for a source without matches")
    return validated_count(src, tgt, mapping) / total


@dataclass
class GGD:
    source: Candidate
    target: Candidate
    mapping: VariableMapping
    support_source: int
    support_target: int
    confidence: float

    def identity(self) -> tuple:
        return (self.source.id, self.target.id, self.mapping.pairs)

    def renaming(self) -> dict[str, str]:
        """Target variable -> name in the rule (source names where mapped)."""
        back = {t: s for s, t in self.mapping.pairs}
        used = set(self.source.pattern.variables)
        out = {}
        n_i = e_i = 0
        for v in self.target.pattern.variables:
            if v in back:
                out[v] = back[v]
                continue
            if self.target.pattern.kind(v) == NODE:
                while f"y{n_i}" in used:
                    n_i += 1
                out[v] = f"y{n_i}"
                n_i += 1
            else:
                while f"f{e_i}" in used:
                    e_i += 1
                out[v] = f"f{e_i}"
                e_i += 1
            used.add(out[v])
        return out

    def target_pattern(self) -> GraphPattern:
        return self.target.pattern.rename(self.renaming())

    def target_constraints(self) -> tuple:
        r = self.renaming()
        return tuple(c.rename(r) for c in self.target.constraints)

    def to_dict(self) -> dict:
        return {
            "source": {"pattern": self.source.pattern.to_dict(),
                       "constraints": [constraint_to_dict(c) for c in self.source.constraints]},
            "target": {"pattern": self.target_pattern().to_dict(),
                       "constraints": [constraint_to_dict(c) for c in self.target_constraints()]},
            "mapping": {s: s for s, _ in self.mapping.pairs},
            "support_source": self.support_source,
            "support_target": self.support_target,
            "confidence": round(self.confidence, 12),
        }

    def __str__(self):
        phi_s = ", ".join(map(str, self.source.constraints))
        phi_t = ", ".join(map(str, self.target_constraints()))
        return (f"{self.source.pattern} [{phi_s}] -> {self.target_pattern()} [{phi_t}] "
                f"conf={self.confidence:.4f}")


@dataclass
class GGDSet:
    ggds: list[GGD] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    coverage: float = 0.0

    def __len__(self):
        return len(self.ggds)

    def __iter__(self):
        return iter(self.ggds)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "coverage": self.coverage,
                "ggds": [g.to_dict() for g in self.ggds]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def coverage(ggds, G: PropertyGraph) -> float:
    """Share of graph elements touched by source matches of the rule set."""
    if len(G) == 0:
        return 0.0
    seen: set[int] = set()
    for g in ggds:
        seen |= g.source.covered
    return len(seen) / len(G)


def extract_ggds(index: CandidateIndex, eps: float, theta: float, m: int, G: PropertyGraph,
                 tau: int = 1, max_mappings: int = 10) -> GGDSet:
    """Pair every source in ``C`` with nearby candidates and keep confident rules."""
    out: list[GGD] = []
    seen = set()
    for u in sorted(index.sources, key=lambda c: c.id):
        for t in search_targets(index, u, theta, m):
            if t.support < tau:
                continue
            for mp in find_mappings(u, t, max_mappings):
                ident = (u.id, t.id, mp.pairs)
                if ident in seen:
                    continue
                conf = confidence(u, t, mp, G)
                if conf >= eps:
                    seen.add(ident)
                    out.append(GGD(u, t, mp, u.support, t.support, conf))
    result = GGDSet(out)
    result.coverage = coverage(out, G)
    return result


@dataclass
class SchemaGraph:
    nodes: set[str] = field(default_factory=set)
    edges: set[tuple[str, str, str]] = field(default_factory=set)

    def recall(self, truth_nodes=(), truth_edges=()) -> dict:
        truth_nodes, truth_edges = set(truth_nodes), {tuple(t) for t in truth_edges}
        tp_e = len(self.edges & truth_edges)
        tp_n = len(self.nodes & truth_nodes)
        return {
            "edge_recall": tp_e / len(truth_edges) if truth_edges else 1.0,
            "node_recall": tp_n / len(truth_nodes) if truth_nodes else 1.0,
            "edges_found": tp_e, "edges_total": len(truth_edges),
            "nodes_found": tp_n, "nodes_total": len(truth_nodes),
        }

    def triples(self) -> list[list[str]]:
        return [list(t) for t in sorted(self.edges)]

    def to_dot(self) -> str:
        lines = ["digraph schema {"]
        lines += [f'  "{n}";' for n in sorted(self.nodes)]
        lines += [f'  "{s}" -> "{d}" [label="{l}"];' for s, l, d in sorted(self.edges)]
        lines.append("}")
        return "\n".join(lines) + "\n"


def schema_graph(ggds) -> SchemaGraph:
    sg = SchemaGraph()
    for g in ggds:
        for Q in (g.source.pattern, g.target.pattern):
            sg.nodes.update(lab for _, lab in Q.nodes)
            sg.edges.update(Q.edge_triples())
    return sg


# ---------------------------------------------------------------------------
# validating user-supplied rules


@dataclass
class ValidationReport:
    support: int
    confidence: float
    violations: list[dict]


def _check_refs(G: PropertyGraph, Q: GraphPattern, phi):
    known_nodes = set(G.nodes_by_label) | set(G.schema.node_attributes)
    known_edges = set(G.edges_by_label) | set(G.schema.edge_attributes)
    for _, lab in Q.nodes:
        if lab not in known_nodes:
            raise ValidationError(f"unknown node label {lab!r}")
    for e in Q.edges:
        if e.label not in known_edges:
            raise ValidationError(f"unknown edge label {e.label!r}")
    for c in phi:
        for v in c.variables:
            if not Q.has_var(v):
                raise ValidationError(f"constraint {c} uses unknown variable {v}")
        for v, a in c.refs():
            kind = Q.kind(v)
            if a not in G.schema.attributes(kind, Q.label(v)):
                raise ValidationError(f"unknown attribute {Q.label(v)}.{a}")


def ggd_from_dict(G: PropertyGraph, data: dict) -> tuple[Candidate, Candidate, VariableMapping]:
    """Source/target candidates and mapping from one Σ_G record."""
    from .lattice import candidate_for

    sp = GraphPattern.from_dict(data["source"]["pattern"])
    tp = GraphPattern.from_dict(data["target"]["pattern"])
    sphi = [constraint_from_dict(c) for c in data["source"].get("constraints", [])]
    tphi = [constraint_from_dict(c) for c in data["target"].get("constraints", [])]
    _check_refs(G, sp, sphi)
    _check_refs(G, tp, tphi)
    mp = data.get("mapping") or {v: v for v in sp.variables if tp.has_var(v)}
    for s, t in mp.items():
        if not sp.has_var(s) or not tp.has_var(t):
            raise ValidationError(f"mapping {s}->{t} names an unknown variable")
        if sp.kind(s) != tp.kind(t) or sp.label(s) != tp.label(t):
            raise ValidationError(f"mapping {s}->{t} joins different labels or kinds")
    return candidate_for(G, sp, sphi, 0), candidate_for(G, tp, tphi, 1), VariableMapping.of(mp)


def validate_ggd(G: PropertyGraph, ggd) -> ValidationReport:
    """Support, confidence and up to ten unextended source matches."""
    if isinstance(ggd, dict):
        src, tgt, mp = ggd_from_dict(G, ggd)
    else:
        src, tgt, mp = ggd.source, ggd.target, ggd.mapping
    if src.support == 0:
        return ValidationReport(0, 0.0, [])
    conf = confidence(src, tgt, mp, G)
    violations = []
    if conf < 1:
        m = mp.as_dict()
        s_vars = tuple(sorted(m))
        allowed = _target_projections(tgt.answer_graph, tuple(m[s] for s in s_vars))
        for match in defactorize(src.answer_graph):
            if tuple(match[s] for s in s_vars) not in allowed:
                violations.append(_readable(G, src.pattern, match))
                if len(violations) >= MAX_VIOLATIONS:
                    break
    return ValidationReport(src.support, conf, violations)


def _readable(G: PropertyGraph, Q: GraphPattern, m: Match) -> dict:
    return {v: (G.nodes[m[v]].id if Q.kind(v) == NODE else G.edges[m[v]].id) for v in sorted(m)}


# ---------------------------------------------------------------------------
# factorized vs. table-based confidence


def table_validated_count(src, tgt, mapping: VariableMapping) -> int:
    """Validation by materialising both match tables and joining them."""
    m = mapping.as_dict()
    s_vars = tuple(sorted(m))
    rows_t = defactorize(_ag(tgt))
    allowed = {tuple(r[m[s]] for s in s_vars) for r in rows_t}
    rows_s = defactorize(_ag(src))
    return sum(1 for r in rows_s if tuple(r[s] for s in s_vars) in allowed)


def _measure(fn):
    tracemalloc.start()
    t0 = time.perf_counter()
    value = fn()
    elapsed = time.perf_counter() - t0
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    return value, elapsed, peak


def confidence_benchmark(src, tgt, mapping: VariableMapping) -> dict:
    """Time and peak traced memory of both confidence paths on the same input."""
    total = count_matches(_ag(src))
    fact, t_f, m_f = _measure(lambda: validated_count(src, tgt, mapping))
    table, t_t, m_t = _measure(lambda: table_validated_count(src, tgt, mapping))
    if fact != table:
        raise AssertionError(f"confidence paths disagree: {fact} vs {table}")
    return {
        "matches": total, "validated": fact,
        "factorized_seconds": t_f, "table_seconds": t_t,
        "factorized_peak_bytes": m_f, "table_peak_bytes": m_t,
        "speedup": t_t / t_f if t_f else float("inf"),
        "memory_ratio": m_t / m_f if m_f else float("inf"),
    }
