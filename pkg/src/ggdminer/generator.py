"""Synthetic graphs with known ground truth, for tests, demos and the CLI."""

from __future__ import annotations

import json
import random
import string
from dataclasses import asdict, dataclass
from pathlib import Path

from .graph import Edge, Node, PropertyGraph, write_graph


class SpecError(ValueError):
    """Generator parameters that cannot be realised."""


@dataclass
class PlantSpec:
    """``A -r-> B`` pairs with similar names; a share ``rate`` of the B nodes get ``B -s-> C``."""

    sources: int = 1200
    rate: float = 0.9
    name_length: int = 8
    max_edits: int = 2
    noise_d: int = 1000
    noise_e: int = 600
    tau: int | None = None

    def check(self):
        if not 0 <= self.rate <= 1:
            raise SpecError(f"rate must lie in [0, 1], got {self.rate}")
        if self.sources < 1 or self.name_length < 1 or self.max_edits < 0:
            raise SpecError("sources and name_length must be >= 1, max_edits >= 0")
        if self.tau is not None and round(self.rate * self.sources) < self.tau:
            raise SpecError("planted target matches fall below the requested tau")
        if self.tau is not None and self.sources < self.tau:
            raise SpecError("fewer sources than the requested tau")


def _word(rng: random.Random, n: int) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(n))


def _perturb(rng: random.Random, s: str, edits: int) -> str:
    """At most ``edits`` substitutions (so the edit distance is at most ``edits``)."""
    chars = list(s)
    for pos in rng.sample(range(len(chars)), min(edits, len(chars))):
        chars[pos] = rng.choice(string.ascii_lowercase)
    return "".join(chars)


def generate_planted_graph(spec: PlantSpec | None = None, seed: int = 0) -> tuple[PropertyGraph, dict]:
    """Graph plus a ground-truth record with the realised confidence.

    The planted rule: every ``A -r-> B`` match (A and B names within
    ``max_edits``) extends to ``A -r-> B -s-> C`` for a ``rate`` share of
    the sources.  Labels ``D`` and ``E`` with ``D -t-> E`` edges are noise.
    """
    spec = spec or PlantSpec()
    spec.check()
    rng = random.Random(seed)
    nodes: list[Node] = []
    edges: list[Edge] = []
    n = spec.sources
    extended = set(rng.sample(range(n), round(spec.rate * n)))
    for i in range(n):
        name = _word(rng, spec.name_length)
        nodes.append(Node(f"a{i}", "A", {"name": name}))
        nodes.append(Node(f"b{i}", "B", {"name": _perturb(rng, name, rng.randint(0, spec.max_edits))}))
        edges.append(Edge(f"r{i}", f"a{i}", f"b{i}", "r", {}))
    for i in sorted(extended):
        nodes.append(Node(f"c{i}", "C", {"code": rng.randint(0, 9)}))
        edges.append(Edge(f"s{i}", f"b{i}", f"c{i}", "s", {}))
    for i in range(spec.noise_e):
        nodes.append(Node(f"e{i}", "E", {"label": _word(rng, 5)}))
    for i in range(spec.noise_d):
        nodes.append(Node(f"d{i}", "D", {"title": _word(rng, 6)}))
        if spec.noise_e:
            edges.append(Edge(f"t{i}", f"d{i}", f"e{rng.randrange(spec.noise_e)}", "t", {}))
    G = PropertyGraph(nodes, edges)

    # census straight from the generated graph
    validated = sum(1 for i in range(n) if G.out_by_label[G.node_index[f"b{i}"]].get("s"))
    truth = {
        "spec": asdict(spec),
        "seed": seed,
        "planted": [{
            "source": {"nodes": [["x0", "A"], ["x1", "B"]], "edges": [["e0", "x0", "x1", "r"]]},
            "target": {"nodes": [["x0", "A"], ["x1", "B"], ["x2", "C"]],
                       "edges": [["e0", "x0", "x1", "r"], ["e1", "x1", "x2", "s"]]},
            "source_matches": n,
            "validated": validated,
            "confidence": validated / n,
        }],
        "census": {"nodes": G.num_nodes, "edges": G.num_edges, "size": len(G)},
    }
    return G, truth


SCHEMA_LABELS = ("P", "Q", "R", "S", "T", "U")
SCHEMA_TRIPLES = (
    ("P", "a", "Q"), ("Q", "b", "R"), ("R", "c", "S"), ("S", "d", "T"),
    ("T", "e", "U"), ("U", "f", "P"), ("P", "g", "R"), ("Q", "h", "T"),
)


def generate_schema_graph(per_label: int = 60, starved: int = 0, starved_count: int = 5,
                          seed: int = 0) -> tuple[PropertyGraph, dict]:
    """Six node labels and eight edge triples; the last ``starved`` triples get few edges.

    Every non-starved triple gives each source-label node one outgoing edge
    and each target-label node one incoming edge.
    """
    if not 0 <= starved <= len(SCHEMA_TRIPLES):
        raise SpecError("starved must be between 0 and the number of triples")
    if starved and starved_count >= per_label:
        raise SpecError("starved triples must have fewer edges than the others")
    rng = random.Random(seed)
    nodes = [Node(f"{lab.lower()}{i}", lab, {}) for lab in SCHEMA_LABELS for i in range(per_label)]
    edges = []
    cut = len(SCHEMA_TRIPLES) - starved
    for t, (s, l, d) in enumerate(SCHEMA_TRIPLES):
        count = per_label if t < cut else starved_count
        # distinct endpoints on both sides, so the triple's MNI equals its edge count
        targets = rng.sample(range(per_label), count)
        for i in range(count):
            edges.append(Edge(f"{l}{i}", f"{s.lower()}{i}", f"{d.lower()}{targets[i]}", l, {}))
    G = PropertyGraph(nodes, edges)
    truth = {"node_labels": list(SCHEMA_LABELS), "edge_triples": [list(t) for t in SCHEMA_TRIPLES],
             "starved": [list(t) for t in SCHEMA_TRIPLES[cut:]]}
    return G, truth


def generate_hub_graph(hubs: int = 20, fan_in: int = 100, fan_out: int = 50, rate: float = 0.8,
                       seed: int = 0) -> tuple[PropertyGraph, dict]:
    """``A -r-> B -s-> C`` stars around B hubs: ``hubs * fan_in * fan_out`` matches.

    A ``rate`` share of the C nodes carry a ``C -u-> D`` edge, so a rule
    from the two-edge pattern to its extension has confidence ``rate``.
    """
    if not 0 <= rate <= 1:
        raise SpecError("rate must lie in [0, 1]")
    rng = random.Random(seed)
    nodes, edges = [], []
    n_d = 0
    for h in range(hubs):
        b = f"b{h}"
        nodes.append(Node(b, "B", {}))
        for i in range(fan_in):
            a = f"a{h}_{i}"
            nodes.append(Node(a, "A", {}))
            edges.append(Edge(f"r{h}_{i}", a, b, "r", {}))
        for i in range(fan_out):
            c = f"c{h}_{i}"
            nodes.append(Node(c, "C", {}))
            edges.append(Edge(f"s{h}_{i}", b, c, "s", {}))
            if rng.random() < rate:
                d = f"d{n_d}"
                n_d += 1
                nodes.append(Node(d, "D", {}))
                edges.append(Edge(f"u{h}_{i}", c, d, "u", {}))
    G = PropertyGraph(nodes, edges)
    return G, {"matches": hubs * fan_in * fan_out}


def write_generated(G: PropertyGraph, truth: dict, out_dir) -> dict[str, str]:
    """Write nodes/edges/schema CSV+JSON and the truth record; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: str(out / name) for k, name in (("nodes", "nodes.csv"), ("edges", "edges.csv"),
                                                ("schema", "schema.json"), ("truth", "truth.json"))}
    write_graph(G, paths["nodes"], paths["edges"], paths["schema"])
    with open(paths["truth"], "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
