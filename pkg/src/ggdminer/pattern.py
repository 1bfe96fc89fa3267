"""Graph patterns, canonical DFS codes, homomorphic matching and MNI support.

A pattern has node variables (name, label) and directed edge variables
(name, src, dst, label).  Matches are homomorphisms: dicts mapping every
variable name to a node index (node variables) or an edge index (edge
variables) of a :class:`~ggdminer.graph.PropertyGraph`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from .graph import PropertyGraph

Match = dict[str, int]

NODE = "node"
EDGE = "edge"


class PatternError(ValueError):
    """Structurally invalid pattern or pattern operation."""


@dataclass(frozen=True)
class PatternEdge:
    name: str
    src: str
    dst: str
    label: str


@dataclass(frozen=True)
class GraphPattern:
    nodes: tuple[tuple[str, str], ...]
    edges: tuple[PatternEdge, ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.nodes] + [e.name for e in self.edges]
        if len(set(names)) != len(names):
            raise PatternError(f"variable names not unique: {names}")
        declared = {n for n, _ in self.nodes}
        for e in self.edges:
            if e.src not in declared or e.dst not in declared:
                raise PatternError(f"edge {e.name} references undeclared variable")
        if not self.nodes:
            raise PatternError("pattern needs at least one node variable")

    @classmethod
    def single(cls, label: str, var: str = "x0") -> "GraphPattern":
        return cls(((var, label),))

    @property
    def node_vars(self) -> list[str]:
        return [n for n, _ in self.nodes]

    @property
    def edge_vars(self) -> list[str]:
        return [e.name for e in self.edges]

    @property
    def variables(self) -> list[str]:
        return self.node_vars + self.edge_vars

    def node_label(self, var: str) -> str:
        for n, lab in self.nodes:
            if n == var:
                return lab
        raise KeyError(var)

    def edge(self, var: str) -> PatternEdge:
        for e in self.edges:
            if e.name == var:
                return e
        raise KeyError(var)

    def kind(self, var: str) -> str:
        if any(n == var for n, _ in self.nodes):
            return NODE
        if any(e.name == var for e in self.edges):
            return EDGE
        raise KeyError(var)

    def label(self, var: str) -> str:
        return self.node_label(var) if self.kind(var) == NODE else self.edge(var).label

    def has_var(self, var: str) -> bool:
        return any(n == var for n, _ in self.nodes) or any(e.name == var for e in self.edges)

    def is_connected(self) -> bool:
        adj = {n: set() for n in self.node_vars}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        start = self.nodes[0][0]
        seen = {start}
        stack = [start]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)

    def is_tree(self) -> bool:
        """Connected, and the undirected skeleton has no loops, parallels or cycles."""
        if not self.is_connected() or len(self.edges) != len(self.nodes) - 1:
            return False
        pairs = set()
        for e in self.edges:
            if e.src == e.dst:
                return False
            key = frozenset((e.src, e.dst))
            if key in pairs:
                return False
            pairs.add(key)
        return True

    def edge_triples(self) -> list[tuple[str, str, str]]:
        return [(self.node_label(e.src), e.label, self.node_label(e.dst)) for e in self.edges]

    def fresh_name(self, prefix: str) -> str:
        used = set(self.variables)
        i = len(self.nodes) if prefix == "x" else len(self.edges)
        while f"{prefix}{i}" in used:
            i += 1
        return f"{prefix}{i}"

    def add_edge(self, src: str, dst: str, label: str, new_node_label: str | None = None) -> "GraphPattern":
        """Pattern with one more edge.

        If ``new_node_label`` is given, exactly one of ``src``/``dst`` must be
        ``None`` and a fresh node variable of that label takes its place.
        """
        nodes = list(self.nodes)
        if new_node_label is not None:
            if (src is None) == (dst is None):
                raise PatternError("forward extension needs exactly one open endpoint")
            fresh = self.fresh_name("x")
            nodes.append((fresh, new_node_label))
            src = fresh if src is None else src
            dst = fresh if dst is None else dst
        ename = self.fresh_name("e")
        return GraphPattern(tuple(nodes), self.edges + (PatternEdge(ename, src, dst, label),))

    def rename(self, mapping: dict[str, str]) -> "GraphPattern":
        r = lambda v: mapping.get(v, v)
        return GraphPattern(
            tuple((r(n), lab) for n, lab in self.nodes),
            tuple(PatternEdge(r(e.name), r(e.src), r(e.dst), e.label) for e in self.edges),
        )

    def to_dict(self) -> dict:
        return {
            "nodes": [{"var": n, "label": lab} for n, lab in self.nodes],
            "edges": [{"var": e.name, "src": e.src, "dst": e.dst, "label": e.label} for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GraphPattern":
        return cls(
            tuple((n["var"], n["label"]) for n in data["nodes"]),
            tuple(PatternEdge(e["var"], e["src"], e["dst"], e["label"]) for e in data.get("edges", [])),
        )

    def __str__(self):
        if not self.edges:
            return f"({self.nodes[0][0]}:{self.nodes[0][1]})"
        lab = dict(self.nodes)
        return ", ".join(f"({e.src}:{lab[e.src]})-[{e.name}:{e.label}]->({e.dst}:{lab[e.dst]})" for e in self.edges)


# ---------------------------------------------------------------------------
# canonical DFS codes

CodeTuple = tuple
DFSCode = tuple[CodeTuple, ...]


@dataclass(frozen=True)
class Embedding:
    """Variable -> position in a DFS code (node index or edge position)."""

    nodes: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, tuple[str, int]]:
        out = {v: (NODE, i) for v, i in self.nodes}
        out.update({v: (EDGE, i) for v, i in self.edges})
        return out


class _State:
    __slots__ = ("pos", "order", "used", "code", "rmpath", "edge_pos")

    def __init__(self, pos, order, used, code, rmpath, edge_pos):
        self.pos = pos
        self.order = order
        self.used = used
        self.code = code
        self.rmpath = rmpath
        self.edge_pos = edge_pos


def _options(Q: GraphPattern, inc, st: _State):
    """Valid next (tuple, edge, new vertex or None) moves of a DFS traversal."""
    lab = dict(Q.nodes)
    rm = st.order[-1]
    on_path = {st.order[i] for i in st.rmpath}
    out = []
    for ei, other, outgoing in inc[rm]:
        if ei in st.used or other not in on_path:
            continue
        e = Q.edges[ei]
        i, j = st.pos[rm], st.pos[other]
        out.append(((i, j, lab[rm], e.label, lab[other], 0 if outgoing else 1), ei, None))
    if out:
        return out
    # forward edges leave from the deepest rightmost-path vertex with undiscovered neighbours
    for idx in reversed(st.rmpath):
        v = st.order[idx]
        for ei, other, outgoing in inc[v]:
            if ei in st.used or other in st.pos:
                continue
            e = Q.edges[ei]
            t = (st.pos[v], len(st.order), lab[v], e.label, lab[other], 0 if outgoing else 1)
            out.append((t, ei, other))
        if out:
            return out
    return out


def canonical_form(Q: GraphPattern) -> tuple[DFSCode, list[Embedding]]:
    """Minimum DFS code of ``Q`` and every variable embedding that yields it."""
    if not Q.is_connected():
        raise PatternError("pattern is disconnected")
    lab = dict(Q.nodes)
    if not Q.edges:
        code = ((0, -1, lab[Q.nodes[0][0]], "", "", -1),)
        return code, [Embedding(((Q.nodes[0][0], 0),), ())]

    inc: dict[str, list] = {n: [] for n in Q.node_vars}
    for ei, e in enumerate(Q.edges):
        inc[e.src].append((ei, e.dst, True))
        if e.dst != e.src:
            inc[e.dst].append((ei, e.src, False))

    states = [_State({v: 0}, [v], frozenset(), (), [0], {}) for v in Q.node_vars]
    for _ in range(len(Q.edges)):
        moves = []
        for st in states:
            for t, ei, new in _options(Q, inc, st):
                moves.append((t, st, ei, new))
        if not moves:
            raise PatternError("DFS traversal got stuck")  # cannot happen for connected patterns
        best = min(m[0] for m in moves)
        nxt = []
        for t, st, ei, new in moves:
            if t != best:
                continue
            pos, order, rmpath = st.pos, st.order, st.rmpath
            if new is not None:
                pos = dict(pos)
                pos[new] = len(order)
                src_idx = t[0]
                rmpath = rmpath[: rmpath.index(src_idx) + 1] + [len(order)]
                order = order + [new]
            edge_pos = dict(st.edge_pos)
            edge_pos[Q.edges[ei].name] = len(st.code)
            nxt.append(_State(pos, order, st.used | {ei}, st.code + (t,), rmpath, edge_pos))
        states = nxt
    code = states[0].code
    embs = {
        Embedding(tuple(sorted(st.pos.items())), tuple(sorted(st.edge_pos.items())))
        for st in states
    }
    return code, sorted(embs, key=lambda e: (e.nodes, e.edges))


def min_dfs_code(Q: GraphPattern) -> DFSCode:
    return canonical_form(Q)[0]


# ---------------------------------------------------------------------------
# matching


def initial_domains(Q: GraphPattern, G: PropertyGraph) -> tuple[dict[str, set[int]], dict[str, set[int]]]:
    """Label-filtered candidate sets before any propagation."""
    nodes = {v: set(G.nodes_by_label.get(lab, ())) for v, lab in Q.nodes}
    edges = {}
    for e in Q.edges:
        ls, ld = Q.node_label(e.src), Q.node_label(e.dst)
        edges[e.name] = {
            j for j in G.edges_by_label.get(e.label, ())
            if G.node_label[G.edge_src[j]] == ls and G.node_label[G.edge_dst[j]] == ld
            and (e.src != e.dst or G.edge_src[j] == G.edge_dst[j])
        }
    return nodes, edges


def arc_consistent(Q: GraphPattern, G: PropertyGraph, nodes: dict[str, set[int]],
                   edges: dict[str, set[int]]) -> tuple[dict[str, set[int]], dict[str, set[int]]]:
    """Fixpoint pruning of node/edge candidates lacking support (node burn-back).

    Works on copies.  For tree-shaped patterns every survivor belongs to at
    least one full match; for other shapes this is arc consistency only.
    """
    nodes = {v: set(s) for v, s in nodes.items()}
    edges = {v: set(s) for v, s in edges.items()}
    changed = True
    while changed:
        changed = False
        for e in Q.edges:
            ns, nd = nodes[e.src], nodes[e.dst]
            cand = edges[e.name]
            keep = {j for j in cand if G.edge_src[j] in ns and G.edge_dst[j] in nd
                    and (e.src != e.dst or G.edge_src[j] == G.edge_dst[j])}
            if len(keep) != len(cand):
                edges[e.name] = keep
                changed = True
            srcs = {G.edge_src[j] for j in keep}
            dsts = {G.edge_dst[j] for j in keep}
            if e.src == e.dst:
                srcs &= dsts
                dsts = srcs
            if not ns <= srcs:
                nodes[e.src] = ns & srcs
                changed = True
            if not nodes[e.dst] <= dsts:
                nodes[e.dst] = nodes[e.dst] & dsts
                changed = True
    return nodes, edges


def _plan(Q: GraphPattern, start: str) -> list[tuple[PatternEdge, str]]:
    """BFS edge order from ``start``; each step says which endpoint is already bound."""
    bound = {start}
    plan = []
    remaining = list(Q.edges)
    while remaining:
        for e in remaining:
            if e.src in bound or e.dst in bound:
                if e.src in bound and e.dst in bound:
                    mode = "both"
                elif e.src in bound:
                    mode = "src"
                else:
                    mode = "dst"
                plan.append((e, mode))
                bound.add(e.src)
                bound.add(e.dst)
                remaining.remove(e)
                break
        else:
            raise PatternError("pattern is disconnected")
    return plan


def search(Q: GraphPattern, G: PropertyGraph, nodes: dict[str, set[int]] | None = None,
           edges: dict[str, set[int]] | None = None, fixed: Match | None = None,
           check: Callable[[Match], bool] | None = None) -> Iterator[Match]:
    """Backtracking homomorphism search restricted to candidate sets.

    ``nodes``/``edges`` default to the label-filtered domains; ``fixed`` pins
    some variables; ``check`` filters complete matches.
    """
    if nodes is None or edges is None:
        n0, e0 = initial_domains(Q, G)
        nodes = n0 if nodes is None else nodes
        edges = e0 if edges is None else edges
    fixed = fixed or {}
    node_fixed = [v for v in Q.node_vars if v in fixed]
    start = node_fixed[0] if node_fixed else min(Q.node_vars, key=lambda v: (len(nodes[v]), v))
    plan = _plan(Q, start)
    lab = dict(Q.nodes)
    h: Match = {}

    def ok_node(var, n):
        if n not in nodes[var]:
            return False
        if var in fixed and fixed[var] != n:
            return False
        return True

    def step(k):
        if k == len(plan):
            if check is None or check(h):
                yield dict(h)
            return
        e, mode = plan[k]
        cand = edges[e.name]
        if mode == "dst":
            pool = G.in_by_label[h[e.dst]].get(e.label, ())
        else:
            pool = G.out_by_label[h[e.src]].get(e.label, ())
        want_e = fixed.get(e.name)
        for j in pool:
            if j not in cand or (want_e is not None and j != want_e):
                continue
            s, d = G.edge_src[j], G.edge_dst[j]
            if mode == "both":
                if d != h[e.dst]:
                    continue
                h[e.name] = j
                yield from step(k + 1)
                del h[e.name]
            else:
                var, n = (e.dst, d) if mode == "src" else (e.src, s)
                if G.node_label[n] != lab[var] or not ok_node(var, n):
                    continue
                h[e.name] = j
                h[var] = n
                yield from step(k + 1)
                del h[var]
                del h[e.name]

    starts = [fixed[start]] if start in fixed else sorted(nodes[start])
    for n in starts:
        if not ok_node(start, n):
            continue
        h[start] = n
        yield from step(0)
        del h[start]


def enumerate_matches(Q: GraphPattern, G: PropertyGraph) -> list[Match]:
    """Every homomorphic match of ``Q`` in ``G``."""
    return list(search(Q, G))


def _mni_from_domains(Q: GraphPattern, G: PropertyGraph, nodes, edges) -> int:
    nodes, edges = arc_consistent(Q, G, nodes, edges)
    if any(not s for s in nodes.values()):
        return 0
    if Q.is_tree():
        return min(len(s) for s in nodes.values())
    best = None
    for v in Q.node_vars:
        count = 0
        for n in sorted(nodes[v]):
            if next(search(Q, G, nodes, edges, fixed={v: n}), None) is not None:
                count += 1
        best = count if best is None else min(best, count)
    return best or 0


def mni_frequency(Q: GraphPattern, G: PropertyGraph) -> int:
    """Minimum-image support: min over node variables of their distinct images."""
    if not Q.is_connected():
        raise PatternError("pattern is disconnected")
    return _mni_from_domains(Q, G, *initial_domains(Q, G))


def enumerate_extensions(Q: GraphPattern, G: PropertyGraph, tau: int, edge_labels,
                         masked: frozenset = frozenset()) -> list[GraphPattern]:
    """All frequent one-edge extensions of ``Q``.

    Extensions use edge labels in ``edge_labels`` whose (source label, edge
    label, target label) triple is not ``masked``.  An edge that duplicates an
    existing pattern edge (same endpoints, label and direction) is skipped:
    under homomorphism it adds nothing.  Results are deduplicated by canonical
    code and ordered by it.
    """
    edge_labels = set(edge_labels)
    nodes, edges = arc_consistent(Q, G, *initial_domains(Q, G))
    if any(not s for s in nodes.values()):
        return []
    lab = dict(Q.nodes)
    existing = {(e.src, e.dst, e.label) for e in Q.edges}
    options: set[tuple] = set()
    for v in Q.node_vars:
        for n in nodes[v]:
            for l, js in G.out_by_label[n].items():
                if l not in edge_labels:
                    continue
                for j in js:
                    d = G.edge_dst[j]
                    tri = (lab[v], l, G.node_label[d])
                    if tri in masked:
                        continue
                    options.add(("fwd", v, "out", l, G.node_label[d]))
                    for w in Q.node_vars:
                        if d in nodes[w] and (v, w, l) not in existing:
                            options.add(("bwd", v, w, l))
            for l, js in G.in_by_label[n].items():
                if l not in edge_labels:
                    continue
                for j in js:
                    s = G.edge_src[j]
                    tri = (G.node_label[s], l, lab[v])
                    if tri not in masked:
                        options.add(("fwd", v, "in", l, G.node_label[s]))

    out: dict[DFSCode, GraphPattern] = {}
    for opt in sorted(options):
        if opt[0] == "fwd":
            _, v, direction, l, other = opt
            Q2 = Q.add_edge(v, None, l, other) if direction == "out" else Q.add_edge(None, v, l, other)
        else:
            _, v, w, l = opt
            Q2 = Q.add_edge(v, w, l)
        code = min_dfs_code(Q2)
        if code in out:
            continue
        n2, e2 = initial_domains(Q2, G)
        for var in Q.node_vars:
            n2[var] &= nodes[var]
        for var in Q.edge_vars:
            e2[var] &= edges[var]
        if _mni_from_domains(Q2, G, n2, e2) >= tau:
            out[code] = Q2
    return [out[c] for c in sorted(out)]
