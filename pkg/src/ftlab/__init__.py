"""Fault-tree analysis toolkit: exact quantification plus episodic RL environments."""

from .core import (
    FaultTree,
    Kind,
    ValidationReport,
    Vertex,
    adjacency_matrix,
    and_gate,
    basic_event,
    kofn_gate,
    or_gate,
    structure_eval,
    topological_order,
    validate,
)
from .formats import (
    ParseError,
    export_graph_doc,
    graph_doc_json,
    parse_ftdsl,
    parse_openpsa,
    serialize_ftdsl,
)
from .gen import GenConfig, generate
from .quant import (
    CutSetCollection,
    bdd_top_probability,
    brute_force_mcs,
    brute_force_probability,
    build_bdd,
    gate_probabilities,
    is_cut_set,
    minimal_cut_sets,
    prob_bottom_up,
)

__all__ = [
    "FaultTree",
    "Kind",
    "ValidationReport",
    "Vertex",
    "adjacency_matrix",
    "and_gate",
    "basic_event",
    "kofn_gate",
    "or_gate",
    "structure_eval",
    "topological_order",
    "validate",
    "ParseError",
    "export_graph_doc",
    "graph_doc_json",
    "parse_ftdsl",
    "parse_openpsa",
    "serialize_ftdsl",
    "GenConfig",
    "generate",
    "CutSetCollection",
    "bdd_top_probability",
    "brute_force_mcs",
    "brute_force_probability",
    "build_bdd",
    "gate_probabilities",
    "is_cut_set",
    "minimal_cut_sets",
    "prob_bottom_up",
]

__version__ = "0.1.0"
