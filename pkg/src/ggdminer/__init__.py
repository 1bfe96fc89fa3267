"""Discovery of approximate graph generating dependencies (GGDs) in property graphs."""

from .answer_graph import (AnswerGraph, build_answer_graph, burn_back, classify_shape, count_matches,
                           covered_elements, create_answer_graph, defactorize, extend_answer_graph,
                           filter_answer_graph)
from .config import RunConfig
from .constraints import VarConst, VarEq, VarVar, find_intervals, respects_boundary, satisfies
from .extraction import (GGD, GGDSet, SchemaGraph, VariableMapping, confidence, coverage, extract_ggds,
                         find_mappings, schema_graph, validate_ggd)
from .graph import Edge, Node, PropertyGraph, SchemaInfo, frequent_labels, graph_stats, load_graph, write_graph
from .index import Candidate, CandidateIndex, build_knn_graph, delta_similarity, search_targets
from .lattice import Lattice, LatticeNode, Settings, candidate_for, construct_lattice
from .pattern import GraphPattern, PatternEdge, enumerate_extensions, enumerate_matches, min_dfs_code, mni_frequency
from .pipeline import discover
from .simindex import DecisionBoundary, build_similarity_clusters, distance, pass_join, select_attribute_pairs

__version__ = "0.1.0"
