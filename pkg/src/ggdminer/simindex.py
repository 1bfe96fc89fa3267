"""Distances, decision boundaries and similarity clusters.

Strings are compared with Levenshtein distance, numbers with absolute
difference.  Similarity clusters are star-shaped: every distinct value ``v``
of an attribute spawns the cluster ``{v} + {u : d(u, v) <= upsilon}``, and
clusters contained in another cluster are dropped.  The pairs within
``upsilon`` come from a pass-join (strings) or a sort-and-sweep (numbers).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

from .graph import NUMBER, STRING, AttrRef, PropertyGraph, SchemaInfo, Value


class DomainError(TypeError):
    """Values compared under a domain they do not belong to."""


@dataclass(frozen=True)
class DecisionBoundary:
    domain: str
    upsilon: float
    kappa: float

    def __post_init__(self):
        if self.upsilon < 0:
            raise ValueError("upsilon must be >= 0")
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")


DEFAULT_BOUNDARIES = {
    STRING: DecisionBoundary(STRING, 2, 2),
    NUMBER: DecisionBoundary(NUMBER, 0, 1),
}


def edit_distance(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def within_edit_distance(a: str, b: str, t: int) -> bool:
    """``edit_distance(a, b) <= t`` using a diagonal band of width ``2t + 1``."""
    if abs(len(a) - len(b)) > t:
        return False
    if t == 0:
        return a == b
    n, m = len(a), len(b)
    big = t + 1
    prev = {j: j for j in range(0, min(m, t) + 1)}
    for i in range(1, n + 1):
        lo, hi = max(0, i - t), min(m, i + t)
        cur = {}
        row_min = big
        for j in range(lo, hi + 1):
            if j == 0:
                v = i
            else:
                v = min(
                    prev.get(j, big) + 1,
                    cur.get(j - 1, big) + 1,
                    prev.get(j - 1, big) + (a[i - 1] != b[j - 1]),
                )
            v = min(v, big)
            cur[j] = v
            row_min = min(row_min, v)
        if row_min > t:
            return False
        prev = cur
    return prev.get(m, big) <= t


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def distance(domain: str, a: Value, b: Value) -> float:
    """Edit distance for strings, absolute difference for numbers."""
    if domain == STRING:
        if not isinstance(a, str) or not isinstance(b, str):
            raise DomainError(f"string distance on {a!r}, {b!r}")
        return edit_distance(a, b)
    if domain == NUMBER:
        if not _is_number(a) or not _is_number(b):
            raise DomainError(f"numeric distance on {a!r}, {b!r}")
        return abs(a - b)
    raise DomainError(f"unknown domain {domain!r}")


def name_similarity(a: str, b: str) -> float:
    a, b = a.lower(), b.lower()
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


@dataclass(frozen=True)
class AttributePair:
    first: AttrRef
    second: AttrRef
    domain: str
    name_similarity: float

    @property
    def label_a(self):
        return self.first[1]

    @property
    def attr_a(self):
        return self.first[2]

    @property
    def label_b(self):
        return self.second[1]

    @property
    def attr_b(self):
        return self.second[2]


def _pair(a: AttrRef, b: AttrRef, domain: str, sim: float) -> AttributePair:
    a, b = sorted((tuple(a), tuple(b)))
    return AttributePair(a, b, domain, sim)


def select_attribute_pairs(schema: SchemaInfo, name_threshold: float = 0.6,
                           node_labels=None, edge_labels=None) -> list[AttributePair]:
    """User-pinned pairs plus same-domain attribute pairs with similar names.

    ``node_labels``/``edge_labels`` restrict automatic selection to frequent
    labels; pinned pairs are always kept.
    """
    refs: list[tuple[AttrRef, str]] = []
    for kind, table, allowed in (("node", schema.node_attributes, node_labels),
                                 ("edge", schema.edge_attributes, edge_labels)):
        for label in sorted(table):
            if allowed is not None and label not in allowed:
                continue
            for attr, dom in sorted(table[label].items()):
                refs.append(((kind, label, attr), dom))

    out: dict[tuple[AttrRef, AttrRef], AttributePair] = {}
    for a, b in schema.attribute_pairs:
        dom = schema.domain(*a)
        if dom is None or dom != schema.domain(*b):
            raise DomainError(f"pinned pair {a} / {b} does not share a domain")
        p = _pair(a, b, dom, name_similarity(a[2], b[2]))
        out[(p.first, p.second)] = p
    for (ra, da), (rb, db) in combinations(refs, 2):
        if da != db:
            continue
        sim = name_similarity(ra[2], rb[2])
        if sim >= name_threshold:
            p = _pair(ra, rb, da, sim)
            out.setdefault((p.first, p.second), p)
    return [out[k] for k in sorted(out)]


def important_attributes(schema: SchemaInfo, pairs: list[AttributePair]) -> set[AttrRef]:
    imp = {tuple(r) for r in schema.important_attributes}
    for p in pairs:
        imp.add(p.first)
        imp.add(p.second)
    return imp


def _segments(length: int, t: int) -> list[tuple[int, int]]:
    """Even partition of ``length`` into ``t + 1`` (start, size) segments."""
    k = t + 1
    base, extra = divmod(length, k)
    segs = []
    pos = 0
    for i in range(k):
        size = base + (1 if i >= k - extra else 0)
        segs.append((pos, size))
        pos += size
    return segs


def pass_join(values: list[str], t: int) -> set[tuple[int, int]]:
    """All index pairs ``(i, j)``, ``i < j``, with edit distance <= ``t``.

    Partition-based filtering: every indexed string of length ``l`` is cut
    into ``t + 1`` segments; a probe within distance ``t`` must contain one
    segment verbatim near its original position (pigeonhole).  Candidate
    substrings are chosen with multi-match-aware position bounds.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    t = int(t)
    order = sorted(range(len(values)), key=lambda i: (len(values[i]), values[i], i))
    # (length, segment number) -> segment text -> indices of owning strings
    index: dict[tuple[int, int], dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    short: list[int] = []  # strings too short to partition into t+1 non-empty segments
    out: set[tuple[int, int]] = set()

    for i in order:
        s = values[i]
        n = len(s)
        cands: set[int] = set()
        for j in short:
            if n - len(values[j]) <= t:
                cands.add(j)
        for l in range(max(0, n - t), n + 1):
            if l <= t:
                continue
            delta = n - l
            for k, (p, size) in enumerate(_segments(l, t)):
                seg_index = index.get((l, k))
                if not seg_index:
                    continue
                lo = max(p - k, p + delta - (t - k))
                hi = min(p + k, p + delta + (t - k))
                lo = max(lo, 0)
                hi = min(hi, n - size)
                for start in range(lo, hi + 1):
                    hits = seg_index.get(s[start:start + size])
                    if hits:
                        cands.update(hits)
        for j in cands:
            if within_edit_distance(s, values[j], t):
                out.add((min(i, j), max(i, j)))
        if n <= t:
            short.append(i)
        else:
            for k, (p, size) in enumerate(_segments(n, t)):
                index[(n, k)][s[p:p + size]].append(i)
    return out


def numeric_join(values: list[float], t: float) -> set[tuple[int, int]]:
    """Index pairs with ``|a - b| <= t`` by sorting and sweeping."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    keys = [values[i] for i in order]
    out = set()
    for pos, i in enumerate(order):
        end = bisect_right(keys, keys[pos] + t)
        for q in range(pos + 1, end):
            j = order[q]
            out.add((min(i, j), max(i, j)))
    return out


def similarity_pairs(domain: str, values: list, threshold: float) -> set[tuple[int, int]]:
    if domain == STRING:
        return pass_join(values, math.floor(threshold))
    return numeric_join(values, threshold)


@dataclass
class SimilarityCluster:
    kind: str
    label: str
    attribute: str
    pivot: Value
    members: dict = field(default_factory=dict)  # value -> tuple of owning element indices
    radius: float = 0

    def owners(self) -> set[int]:
        return {o for ids in self.members.values() for o in ids}

    def __len__(self):
        return len(self.members)


def _sort_key(v):
    return (0, v, "") if _is_number(v) else (1, 0, str(v))


def build_similarity_clusters(G: PropertyGraph, kind: str, label: str, attribute: str,
                              boundary: DecisionBoundary) -> list[SimilarityCluster]:
    ids = (G.nodes_by_label if kind == "node" else G.edges_by_label).get(label, [])
    elements = G.nodes if kind == "node" else G.edges
    owners: dict = defaultdict(list)
    for i in ids:
        v = elements[i].properties.get(attribute)
        if v is not None:
            owners[v].append(i)
    if not owners:
        return []
    domain = G.schema.domain(kind, label, attribute) or boundary.domain
    distinct = sorted(owners, key=_sort_key)
    neighbours: dict[int, set[int]] = defaultdict(set)
    for i, j in similarity_pairs(domain, distinct, boundary.upsilon):
        neighbours[i].add(j)
        neighbours[j].add(i)

    members = {i: frozenset(neighbours[i] | {i}) for i in range(len(distinct))}
    clusters = []
    for i in range(len(distinct)):
        mine = members[i]
        # a superset cluster must be centred on a neighbour of i
        dominated = any(
            mine < members[j] or (mine == members[j] and j < i)
            for j in neighbours[i]
        )
        if dominated:
            continue
        vals = sorted((distinct[j] for j in mine), key=_sort_key)
        clusters.append(SimilarityCluster(
            kind, label, attribute, distinct[i],
            {v: tuple(owners[v]) for v in vals}, boundary.upsilon,
        ))
    return clusters
