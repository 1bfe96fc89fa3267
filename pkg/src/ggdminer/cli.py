"""Command-line entry points: discover, validate, schema, stats, gen.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, RunConfig
from .extraction import ValidationError, schema_graph, validate_ggd
from .generator import PlantSpec, SpecError, generate_planted_graph, generate_schema_graph, write_generated
from .graph import GraphError, graph_stats, load_graph
from .pattern import PatternError
from .pipeline import discover
from .simindex import DomainError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("ggdminer")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _graph_args(p):
    p.add_argument("--nodes", required=True, help="node CSV (id,label,...)")
    p.add_argument("--edges", required=True, help="edge CSV (id,src,dst,label,...)")
    p.add_argument("--schema", help="schema JSON; inferred when omitted")


def _config_args(p):
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--tau", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--theta", type=float, dest="similarity_threshold")
    p.add_argument("--k", type=int)
    p.add_argument("--capacity", type=int, dest="source_capacity")
    p.add_argument("--hops", type=int)
    p.add_argument("--kg", type=int, dest="k_g")
    p.add_argument("--seed", type=int)


def _config(args, **forced) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    over = {k: getattr(args, k) for k in ("tau", "epsilon", "similarity_threshold", "k", "source_capacity",
                                          "hops", "k_g", "seed")}
    over.update(forced)
    return cfg.replace(**over)


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_discover(args) -> int:
    G = load_graph(args.nodes, args.edges, args.schema)
    res = discover(G, _config(args))
    _write(args.out, res.ggds.to_json() + "\n")
    report = dict(res.report)
    if args.lattice_dump:
        report["lattice"] = res.lattice.dump()
    if args.report:
        _write(args.report, _dump(report))
    else:
        log.info("GGDs: %d  coverage: %.4f", len(res.ggds), res.ggds.coverage)
        for stage, secs in report["stages_seconds"].items():
            log.info("  %-22s %.3fs", stage, secs)
    return EXIT_OK


def cmd_validate(args) -> int:
    G = load_graph(args.nodes, args.edges, args.schema)
    with open(args.ggds, encoding="utf-8") as fh:
        text = fh.read().strip()
    data = json.loads(text) if text else {}
    records = data.get("ggds", data if isinstance(data, list) else [])
    out = []
    for i, rec in enumerate(records):
        r = validate_ggd(G, rec)
        out.append({"index": i, "support": r.support, "confidence": r.confidence,
                    "stored_confidence": rec.get("confidence"), "violations": r.violations})
    _write(args.out, _dump(out))
    return EXIT_OK


def cmd_schema(args) -> int:
    G = load_graph(args.nodes, args.edges, args.schema)
    res = discover(G, _config(args, discover_constraints=False))
    sg = schema_graph(res.ggds)
    with open(args.truth, encoding="utf-8") as fh:
        truth = json.load(fh)
    report = {
        "node_labels": sorted(sg.nodes),
        "edge_triples": sg.triples(),
        "ggds": len(res.ggds),
        "recall": sg.recall(truth.get("node_labels", []), truth.get("edge_triples", [])),
    }
    _write(args.out, _dump(report))
    if args.dot:
        _write(args.dot, sg.to_dot())
    return EXIT_OK


def cmd_stats(args) -> int:
    G = load_graph(args.nodes, args.edges, args.schema)
    _write(args.out, _dump(graph_stats(G)))
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "planted":
        G, truth = generate_planted_graph(
            PlantSpec(sources=args.sources, rate=args.rate, noise_d=args.noise_d, noise_e=args.noise_e),
            seed=args.seed)
    else:
        G, truth = generate_schema_graph(per_label=args.per_label, starved=args.starved, seed=args.seed)
    paths = write_generated(G, truth, args.out_dir)
    _write(None, _dump(paths))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ggdminer", description="Discover graph generating dependencies in a property graph.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("discover", help="mine GGDs")
    _graph_args(d)
    _config_args(d)
    d.add_argument("--out", default="-", help="where to write the GGD set (JSON)")
    d.add_argument("--report", help="where to write the run report (JSON)")
    d.add_argument("--lattice-dump", action="store_true", help="include every lattice node in the report")
    d.set_defaults(fn=cmd_discover)

    v = sub.add_parser("validate", help="recompute support/confidence of GGDs")
    _graph_args(v)
    v.add_argument("--ggds", required=True)
    v.add_argument("--out", default="-")
    v.set_defaults(fn=cmd_validate)

    s = sub.add_parser("schema", help="rebuild the schema from discovered GGDs")
    _graph_args(s)
    _config_args(s)
    s.add_argument("--truth", required=True, help="JSON with node_labels and edge_triples")
    s.add_argument("--out", default="-")
    s.add_argument("--dot", help="also write the schema graph in DOT format")
    s.set_defaults(fn=cmd_schema)

    st = sub.add_parser("stats", help="label counts and attribute fill rates")
    _graph_args(st)
    st.add_argument("--out", default="-")
    st.set_defaults(fn=cmd_stats)

    g = sub.add_parser("gen", help="write a synthetic graph with ground truth")
    g.add_argument("kind", choices=["planted", "schema"])
    g.add_argument("--out-dir", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sources", type=int, default=1200)
    g.add_argument("--rate", type=float, default=0.9)
    g.add_argument("--noise-d", type=int, default=1000)
    g.add_argument("--noise-e", type=int, default=600)
    g.add_argument("--per-label", type=int, default=60)
    g.add_argument("--starved", type=int, default=0)
    g.set_defaults(fn=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.fn(args)
    except (GraphError, ConfigError, SpecError, ValidationError, PatternError, DomainError,
            OSError, json.JSONDecodeError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except Exception as exc:  # anything else is a bug
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
