"""Confidence through the answer graph versus a flat match table.

Hub-shaped data makes ``A -r-> B -s-> C`` explode: 20 hubs with 100 in-edges
and 50 out-edges each give 100,000 matches.  The factorized answer graph
keeps only the per-variable candidate sets, while the table path lists
every match and looks each one up in the target's projection.

    python3 demos/factorized_benchmark.py
"""

from ggdminer.extraction import VariableMapping, confidence_benchmark
from ggdminer.generator import generate_hub_graph
from ggdminer.lattice import candidate_for
from ggdminer.pattern import GraphPattern

for fan_in in (25, 50, 100):
    G, _ = generate_hub_graph(hubs=20, fan_in=fan_in, fan_out=50, rate=0.8, seed=3)
    src_p = GraphPattern.single("A").add_edge("x0", None, "r", "B").add_edge("x1", None, "s", "C")
    tgt_p = src_p.add_edge("x2", None, "u", "D")
    src, tgt = candidate_for(G, src_p, (), 0), candidate_for(G, tgt_p, (), 1)
    b = confidence_benchmark(src, tgt, VariableMapping.of({v: v for v in src_p.variables}))
    print(f"{b['matches']:>7} matches  conf={b['validated'] / b['matches']:.3f}  "
          f"speedup {b['speedup']:6.1f}x  memory {b['memory_ratio']:6.1f}x")
