"""Property graph data model, delimited-file ingestion and label statistics.

Node and edge ids are opaque strings on the outside.  Internally every node
and edge gets a dense integer index so that candidate sets can be plain
``set[int]`` objects.  Graph elements (nodes and edges together) share one
integer space: node ``i`` is element ``i`` and edge ``j`` is element
``num_nodes + j``.  Coverage is computed over that space.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

STRING = "string"
NUMBER = "number"
DOMAINS = (STRING, NUMBER)

NODE_HEADER = ("id", "label")
EDGE_HEADER = ("id", "src", "dst", "label")

Value = str | int | float
AttrRef = tuple[str, str, str]  # (kind, label, attribute), kind in {"node", "edge"}


class GraphError(Exception):
    """Base class for graph ingestion problems."""


class GraphLoadError(GraphError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ReferentialIntegrityError(GraphError):
    def __init__(self, edge_ids: list[str]):
        self.edge_ids = list(edge_ids)
        shown = ", ".join(self.edge_ids[:20])
        more = "" if len(self.edge_ids) <= 20 else f" (+{len(self.edge_ids) - 20} more)"
        super().__init__(f"edges with dangling endpoints: {shown}{more}")


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    properties: Mapping[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    label: str
    properties: Mapping[str, Value] = field(default_factory=dict)


@dataclass
class SchemaInfo:
    """Attribute domains per node/edge label plus optional user pins.

    ``important_attributes`` holds ``(kind, label, attr)`` refs and
    ``attribute_pairs`` holds pairs of such refs.
    """

    node_attributes: dict[str, dict[str, str]] = field(default_factory=dict)
    edge_attributes: dict[str, dict[str, str]] = field(default_factory=dict)
    important_attributes: list[AttrRef] = field(default_factory=list)
    attribute_pairs: list[tuple[AttrRef, AttrRef]] = field(default_factory=list)

    def attributes(self, kind: str, label: str) -> dict[str, str]:
        table = self.node_attributes if kind == "node" else self.edge_attributes
        return table.get(label, {})

    def domain(self, kind: str, label: str, attr: str) -> str | None:
        return self.attributes(kind, label).get(attr)

    def to_dict(self) -> dict:
        return {
            "node_labels": self.node_attributes,
            "edge_labels": self.edge_attributes,
            "important_attributes": [list(r) for r in self.important_attributes],
            "attribute_pairs": [[list(a), list(b)] for a, b in self.attribute_pairs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SchemaInfo":
        for table in ("node_labels", "edge_labels"):
            for label, attrs in data.get(table, {}).items():
                for attr, dom in attrs.items():
                    if dom not in DOMAINS:
                        raise GraphError(f"unknown domain {dom!r} for {label}.{attr}")
        return cls(
            node_attributes={k: dict(v) for k, v in data.get("node_labels", {}).items()},
            edge_attributes={k: dict(v) for k, v in data.get("edge_labels", {}).items()},
            important_attributes=[tuple(r) for r in data.get("important_attributes", [])],
            attribute_pairs=[(tuple(a), tuple(b)) for a, b in data.get("attribute_pairs", [])],
        )


@dataclass(frozen=True)
class FrequentLabels:
    node_labels: frozenset[str]
    edge_labels: frozenset[str]
    node_counts: Mapping[str, int]
    edge_counts: Mapping[str, int]
    tau: int


class PropertyGraph:
    """Immutable labeled, attributed, directed multigraph."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge], schema: SchemaInfo | None = None):
        self.nodes: list[Node] = list(nodes)
        self.edges: list[Edge] = list(edges)
        self.node_index: dict[str, int] = {}
        for i, n in enumerate(self.nodes):
            if n.id in self.node_index:
                raise GraphError(f"duplicate node id {n.id!r}")
            self.node_index[n.id] = i
        self.edge_index: dict[str, int] = {}
        for j, e in enumerate(self.edges):
            if e.id in self.edge_index:
                raise GraphError(f"duplicate edge id {e.id!r}")
            self.edge_index[e.id] = j
        dangling = [e.id for e in self.edges if e.src not in self.node_index or e.dst not in self.node_index]
        if dangling:
            raise ReferentialIntegrityError(dangling)

        self.node_label: list[str] = [n.label for n in self.nodes]
        self.edge_label: list[str] = [e.label for e in self.edges]
        self.edge_src: list[int] = [self.node_index[e.src] for e in self.edges]
        self.edge_dst: list[int] = [self.node_index[e.dst] for e in self.edges]

        self.nodes_by_label: dict[str, list[int]] = defaultdict(list)
        for i, lab in enumerate(self.node_label):
            self.nodes_by_label[lab].append(i)
        self.edges_by_label: dict[str, list[int]] = defaultdict(list)
        self.out_edges: list[list[int]] = [[] for _ in self.nodes]
        self.in_edges: list[list[int]] = [[] for _ in self.nodes]
        # node -> edge label -> edge ids, used by answer-graph extension
        self.out_by_label: list[dict[str, list[int]]] = [{} for _ in self.nodes]
        self.in_by_label: list[dict[str, list[int]]] = [{} for _ in self.nodes]
        for j, lab in enumerate(self.edge_label):
            s, d = self.edge_src[j], self.edge_dst[j]
            self.edges_by_label[lab].append(j)
            self.out_edges[s].append(j)
            self.in_edges[d].append(j)
            self.out_by_label[s].setdefault(lab, []).append(j)
            self.in_by_label[d].setdefault(lab, []).append(j)
        self.nodes_by_label = dict(self.nodes_by_label)
        self.edges_by_label = dict(self.edges_by_label)
        self.schema = schema if schema is not None else infer_schema(self.nodes, self.edges)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.nodes) + len(self.edges)

    def value(self, kind: str, index: int, attr: str) -> Value | None:
        element = self.nodes[index] if kind == "node" else self.edges[index]
        return element.properties.get(attr)

    def element_id(self, kind: str, index: int) -> int:
        """Position of a node/edge in the shared element space."""
        return index if kind == "node" else len(self.nodes) + index

    def __repr__(self) -> str:
        return f"PropertyGraph(nodes={self.num_nodes}, edges={self.num_edges})"


def _parse_number(text: str) -> int | float | None:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return None


def infer_schema(nodes: Iterable[Node], edges: Iterable[Edge]) -> SchemaInfo:
    """Domains from observed values: numeric iff every observed value is a number."""
    schema = SchemaInfo()
    for kind, elements in (("node", nodes), ("edge", edges)):
        table = schema.node_attributes if kind == "node" else schema.edge_attributes
        numeric: dict[tuple[str, str], bool] = {}
        for el in elements:
            for attr, v in el.properties.items():
                is_num = isinstance(v, (int, float)) and not isinstance(v, bool)
                key = (el.label, attr)
                numeric[key] = numeric.get(key, True) and is_num
            table.setdefault(el.label, {})
        for (label, attr), is_num in sorted(numeric.items()):
            table[label][attr] = NUMBER if is_num else STRING
    return schema


def _read_rows(path: Path, required: tuple[str, ...]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise GraphLoadError(path, 1, "missing header") from None
        header = [h.strip() for h in header]
        if tuple(header[: len(required)]) != required:
            raise GraphLoadError(path, 1, f"header must start with {','.join(required)}")
        attrs = header[len(required):]
        dup = [a for a, c in Counter(attrs).items() if c > 1]
        if dup:
            logger.warning("%s: repeated attribute columns %s, last value wins", path, dup)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise GraphLoadError(path, line, f"expected {len(header)} fields, got {len(row)}")
            fixed = [c.strip() for c in row[: len(required)]]
            if any(not c for c in fixed):
                raise GraphLoadError(path, line, "empty reserved field")
            props = {}
            for a, cell in zip(attrs, row[len(required):]):
                if cell != "":
                    props[a] = cell
            yield line, fixed, props


def _typed(props: dict[str, str], domains: dict[str, str]) -> dict[str, Value]:
    out: dict[str, Value] = {}
    for attr, raw in props.items():
        if domains.get(attr) == NUMBER:
            num = _parse_number(raw)
            out[attr] = raw if num is None else num
        else:
            out[attr] = raw
    return out


def _raw_domains(rows, kind_table: dict[str, dict[str, str]]) -> None:
    numeric: dict[tuple[str, str], bool] = {}
    for _, fixed, props in rows:
        label = fixed[-1]
        kind_table.setdefault(label, {})
        for attr, raw in props.items():
            key = (label, attr)
            numeric[key] = numeric.get(key, True) and _parse_number(raw) is not None
    for (label, attr), is_num in sorted(numeric.items()):
        kind_table[label][attr] = NUMBER if is_num else STRING


def load_schema(path) -> SchemaInfo:
    with open(path, encoding="utf-8") as fh:
        return SchemaInfo.from_dict(json.load(fh))


def load_graph(nodes_path, edges_path, schema_path=None) -> PropertyGraph:
    """Read a graph from a node CSV and an edge CSV.

    Node files carry ``id,label,<attr>...`` and edge files
    ``id,src,dst,label,<attr>...``.  Empty cells are absent attributes.
    Without a schema file, attribute domains are inferred from the values.
    """
    nodes_path, edges_path = Path(nodes_path), Path(edges_path)
    node_rows = list(_read_rows(nodes_path, NODE_HEADER))
    edge_rows = list(_read_rows(edges_path, EDGE_HEADER))

    if schema_path is not None:
        schema = load_schema(schema_path)
    else:
        schema = SchemaInfo()
    inferred = SchemaInfo()
    _raw_domains(node_rows, inferred.node_attributes)
    _raw_domains(edge_rows, inferred.edge_attributes)
    # attributes the schema file omits still get a domain
    for table, extra in ((schema.node_attributes, inferred.node_attributes),
                         (schema.edge_attributes, inferred.edge_attributes)):
        for label, attrs in extra.items():
            entry = table.setdefault(label, {})
            for attr, dom in attrs.items():
                entry.setdefault(attr, dom)

    nodes: dict[str, Node] = {}
    for line, (nid, label), props in node_rows:
        typed = _typed(props, schema.node_attributes.get(label, {}))
        if nid in nodes:
            prev = nodes[nid]
            if prev.label != label:
                raise GraphLoadError(nodes_path, line, f"node {nid!r} relabeled {prev.label!r} -> {label!r}")
            logger.warning("%s:%d: node %r repeated, last value wins", nodes_path, line, nid)
            typed = {**prev.properties, **typed}
        nodes[nid] = Node(nid, label, typed)

    edges: dict[str, Edge] = {}
    for line, (eid, src, dst, label), props in edge_rows:
        if eid in edges:
            raise GraphLoadError(edges_path, line, f"duplicate edge id {eid!r}")
        edges[eid] = Edge(eid, src, dst, label, _typed(props, schema.edge_attributes.get(label, {})))

    return PropertyGraph(nodes.values(), edges.values(), schema)


def _fmt(v: Value) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_graph(G: PropertyGraph, nodes_path, edges_path, schema_path=None) -> None:
    """Inverse of :func:`load_graph`; reloading yields the same graph."""
    for path, elements, header in ((nodes_path, G.nodes, NODE_HEADER), (edges_path, G.edges, EDGE_HEADER)):
        attrs = sorted({a for el in elements for a in el.properties})
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([*header, *attrs])
            for el in elements:
                fixed = [el.id, el.label] if header is NODE_HEADER else [el.id, el.src, el.dst, el.label]
                w.writerow([*fixed, *(_fmt(el.properties[a]) if a in el.properties else "" for a in attrs)])
    if schema_path is not None:
        with open(schema_path, "w", encoding="utf-8") as fh:
            json.dump(G.schema.to_dict(), fh, indent=2, sort_keys=True)


def frequent_labels(G: PropertyGraph, tau: int) -> FrequentLabels:
    """Labels whose node (resp. edge) count reaches ``tau``."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    node_counts = {lab: len(ids) for lab, ids in G.nodes_by_label.items()}
    edge_counts = {lab: len(ids) for lab, ids in G.edges_by_label.items()}
    return FrequentLabels(
        frozenset(lab for lab, c in node_counts.items() if c >= tau),
        frozenset(lab for lab, c in edge_counts.items() if c >= tau),
        node_counts,
        edge_counts,
        tau,
    )


def graph_stats(G: PropertyGraph) -> dict:
    """Label counts, attribute fill rates and ``|G| = nodes + edges``."""
    fill: dict[str, dict[str, float]] = {}
    for kind, by_label, elements in (("node", G.nodes_by_label, G.nodes), ("edge", G.edges_by_label, G.edges)):
        for label, ids in sorted(by_label.items()):
            attrs = G.schema.attributes(kind, label)
            fill[f"{kind}:{label}"] = {
                a: sum(1 for i in ids if a in elements[i].properties) / len(ids) for a in sorted(attrs)
            }
    return {
        "nodes": G.num_nodes,
        "edges": G.num_edges,
        "size": G.num_nodes + G.num_edges,
        "node_labels": {k: len(v) for k, v in sorted(G.nodes_by_label.items())},
        "edge_labels": {k: len(v) for k, v in sorted(G.edges_by_label.items())},
        "fill_rates": fill,
    }
