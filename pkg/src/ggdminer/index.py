"""Candidate pool, coverage-greedy source set and the similarity k-NN graph."""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property

from .answer_graph import AnswerGraph, covered_elements
from .constraints import signature
from .pattern import GraphPattern

EXACT_KNN_LIMIT = 2000


class NotIndexedError(LookupError):
    """Candidate not present in the index."""


@dataclass(eq=False)
class Candidate:
    """A lattice node offered to the index: pattern, constraints and their matches."""

    id: int
    pattern: GraphPattern
    constraints: tuple
    answer_graph: AnswerGraph = field(repr=False)
    support: int
    mni: int = 0
    level: int = 0
    parent: "Candidate | None" = field(default=None, repr=False)
    key: tuple = field(default=(), repr=False)
    # single constraints a vertical child may inherit
    singles: tuple = field(default=(), repr=False)

    @cached_property
    def covered(self) -> frozenset[int]:
        return frozenset(covered_elements(self.answer_graph))

    @cached_property
    def edge_profile(self) -> Counter:
        return Counter(self.pattern.edge_triples())

    @cached_property
    def constraint_profile(self) -> Counter:
        return Counter(signature(c, self.pattern) for c in self.constraints)

    def describe(self) -> str:
        phi = ", ".join(map(str, self.constraints)) or "-"
        return f"#{self.id} {self.pattern} | {phi} | support={self.support}"


@dataclass(frozen=True)
class SimilarityScore:
    delta_q: float
    delta_phi: float

    @property
    def delta(self) -> float:
        return (self.delta_q + self.delta_phi) / 2


def _delta_q(a: Candidate, b: Candidate) -> float:
    pa, pb = a.pattern, b.pattern
    if not pa.edges or not pb.edges:
        if not pa.edges and not pb.edges and pa.nodes[0][1] == pb.nodes[0][1]:
            return 1.0
        return 0.0
    common = sum((a.edge_profile & b.edge_profile).values())
    return common / max(len(pa.edges), len(pb.edges))


def _delta_phi(a: Candidate, b: Candidate) -> float:
    na, nb = len(a.constraints), len(b.constraints)
    if na == 0 and nb == 0:
        return 1.0
    common = sum((a.constraint_profile & b.constraint_profile).values())
    return common / max(na, nb)


def delta_similarity(a: Candidate, b: Candidate) -> SimilarityScore:
    return SimilarityScore(_delta_q(a, b), _delta_phi(a, b))


def delta(a: Candidate, b: Candidate) -> float:
    return delta_similarity(a, b).delta


class CandidateIndex:
    """All registered candidates, the source set ``C`` and the k-NN graph."""

    def __init__(self, capacity: int = 7, graph_size: int | None = None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.graph_size = graph_size
        self.pool: list[Candidate] = []
        self.sources: list[Candidate] = []
        self.knn: dict[int, list[tuple[int, float]]] = {}
        self._by_id: dict[int, Candidate] = {}
        self._mult: Counter = Counter()  # element -> number of sources covering it

    def __len__(self):
        return len(self.pool)

    def __contains__(self, c: Candidate):
        return c.id in self._by_id

    def get(self, cid: int) -> Candidate:
        return self._by_id[cid]

    def covered(self) -> set[int]:
        return set(self._mult)

    def coverage(self) -> float:
        if not self.graph_size:
            return 0.0
        return len(self._mult) / self.graph_size

    def _marginal(self, c: Candidate) -> int:
        return sum(1 for x in c.covered if self._mult[x] == 1)

    def _drop(self, c: Candidate):
        self.sources.remove(c)
        for x in c.covered:
            self._mult[x] -= 1
            if not self._mult[x]:
                del self._mult[x]

    def add_candidate(self, c: Candidate) -> bool:
        """Add ``c`` to the pool; returns True if it joined the source set."""
        if c.id in self._by_id:
            raise ValueError(f"candidate {c.id} already registered")
        self.pool.append(c)
        self._by_id[c.id] = c
        self.knn = {}
        if not any(x not in self._mult for x in c.covered):
            return False
        self.sources.append(c)
        self._mult.update(c.covered)
        # members made redundant by c
        changed = True
        while changed:
            changed = False
            for s in list(self.sources):
                if s is not c and self._marginal(s) == 0:
                    self._drop(s)
                    changed = True
                    break
        if len(self.sources) > self.capacity:
            victim = min(self.sources, key=lambda s: (self._marginal(s), s.id))
            self._drop(victim)
        return c in self.sources

    def build_knn(self, k_g: int, seed: int = 0):
        self.knn = build_knn_graph(self.pool, k_g, seed)
        self.k_g = k_g
        return self.knn

    def dump(self) -> list[dict]:
        src = {s.id for s in self.sources}
        return [{
            "id": c.id, "pattern": str(c.pattern), "constraints": [str(x) for x in c.constraints],
            "support": c.support, "covered": len(c.covered), "source": c.id in src,
            "neighbours": [[n, round(d, 6)] for n, d in self.knn.get(c.id, [])],
        } for c in self.pool]


def _top(scores: list[tuple[int, float]], k: int) -> list[tuple[int, float]]:
    return sorted(scores, key=lambda p: (-p[1], p[0]))[:k]


def exact_knn(pool: list[Candidate], k_g: int) -> dict[int, list[tuple[int, float]]]:
    out = {}
    for a in pool:
        out[a.id] = _top([(b.id, delta(a, b)) for b in pool if b is not a], k_g)
    return out


def nn_descent(pool: list[Candidate], k_g: int, seed: int = 0, sample_rate: float = 0.5,
               max_iter: int = 10, min_update: float = 0.01) -> dict[int, list[tuple[int, float]]]:
    """Neighbour-of-neighbour refinement from a random start."""
    rng = random.Random(seed)
    by_id = {c.id: c for c in pool}
    ids = [c.id for c in pool]
    k = min(k_g, len(pool) - 1)
    nbrs: dict[int, dict[int, float]] = {}
    for i in ids:
        picks = rng.sample([j for j in ids if j != i], k) if k > 0 else []
        nbrs[i] = {j: delta(by_id[i], by_id[j]) for j in picks}

    def worst(i):
        return min(nbrs[i].items(), key=lambda p: (p[1], -p[0]))

    def offer(i, j) -> bool:
        if i == j or j in nbrs[i]:
            return False
        d = delta(by_id[i], by_id[j])
        if len(nbrs[i]) < k:
            nbrs[i][j] = d
            return True
        wj, wd = worst(i)
        if (d, -j) > (wd, -wj):
            del nbrs[i][wj]
            nbrs[i][j] = d
            return True
        return False

    for _ in range(max_iter):
        reverse: dict[int, list[int]] = {i: [] for i in ids}
        for i in ids:
            for j in nbrs[i]:
                reverse[j].append(i)
        updates = 0
        for i in ids:
            local = list(nbrs[i]) + reverse[i]
            local = [j for j in local if rng.random() < sample_rate] or local[:1]
            for a in local:
                for b in local:
                    if a < b:
                        updates += offer(a, b) + offer(b, a)
        if updates < min_update * len(ids) * max(k, 1):
            break
    return {i: _top(list(nbrs[i].items()), k_g) for i in ids}


def build_knn_graph(pool: list[Candidate], k_g: int, seed: int = 0) -> dict[int, list[tuple[int, float]]]:
    """Per candidate, its ``k_g`` most similar others (by Delta, ties by id)."""
    if k_g < 1:
        raise ValueError("k_g must be >= 1")
    if len(pool) <= EXACT_KNN_LIMIT:
        return exact_knn(pool, k_g)
    return nn_descent(pool, k_g, seed)


def search_targets(index: CandidateIndex, u: Candidate, theta: float, m: int) -> list[Candidate]:
    """Candidates within ``m`` hops of ``u`` with ``theta <= Delta(u, n) < 1``."""
    if u.id not in index._by_id:
        raise NotIndexedError(f"candidate {u.id} is not in the index")
    if not index.knn and len(index.pool) > 1:
        raise ValueError("k-NN graph not built; call build_knn first")
    k_g = getattr(index, "k_g", max((len(v) for v in index.knn.values()), default=1))
    cap = k_g ** m
    out: list[Candidate] = []
    seen = {u.id}
    frontier = deque([(u.id, 0)])
    while frontier:
        cid, depth = frontier.popleft()
        if depth == m:
            continue
        for nid, _ in index.knn.get(cid, ()):
            if nid in seen:
                continue
            seen.add(nid)
            n = index.get(nid)
            d = delta(u, n)
            if theta <= d < 1:
                out.append(n)
                if len(out) >= cap:
                    return out
            frontier.append((nid, depth + 1))
    return out
