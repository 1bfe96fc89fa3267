"""Rebuild a schema from the discovered rules.

Every label triple of the generated graph has 60 instances except for the
"starved" ones, which fall under the support threshold.  The schema graph
formed by the rule patterns should contain exactly the frequent triples.

    python3 demos/schema_recovery.py
"""

from ggdminer.config import RunConfig
from ggdminer.extraction import schema_graph
from ggdminer.generator import generate_schema_graph
from ggdminer.pipeline import discover

for starved in (0, 2):
    G, truth = generate_schema_graph(per_label=60, starved=starved, seed=2)
    res = discover(G, RunConfig(tau=20))
    sg = schema_graph(res.ggds)
    rec = sg.recall(truth["node_labels"], truth["edge_triples"])
    print(f"starved={starved}: edge recall {rec['edges_found']}/{rec['edges_total']}, "
          f"node recall {rec['nodes_found']}/{rec['nodes_total']}")
    if starved:
        missing = {tuple(t) for t in truth["edge_triples"]} - sg.edges
        print("  missing:", sorted(missing))

print()
print(sg.to_dot())
