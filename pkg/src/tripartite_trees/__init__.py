"""Embedding bounded-degree trees monochromatically in 2-coloured complete tripartite graphs."""
from __future__ import annotations

from .assignment import (
    ClusterAssignment,
    WeightTable,
    assign_to_forks,
    assign_to_matching,
    build_valid_assignment,
    check_valid,
    repair_homomorphism,
    walk_parity,
)
from .embedder import Embedding, embed, typical_vertices, verify_embedding
from .errors import *  # noqa: F401,F403
from .extremal import (
    Certificate,
    Inconclusive,
    PyramidWitness,
    SpiderWitness,
    certify_good_or_odd,
    extremal_certificate,
    improve_matching,
    pyramid_certificate,
    spider_certificate,
    validate_certificate,
    validate_witness,
)
from .graph_core import Colour, ColouredTripartiteGraph, build_graph, density, in_class_K_eta, is_eta_complete
from .instances import (
    gen_planted_host,
    gen_pyramid,
    gen_random_colouring,
    gen_sparse_host,
    gen_spider,
    oracle_max_connected_matching,
    oracle_max_fork_system,
    oracle_tree_embedding,
)
from .pipeline import PipelineResult, run_pipeline
from .regularity import Partition, PairAudit, audit_pair, equipartition, reduced_colour_graph
from .structures import ForkSystem, Matching, max_connected_matching, max_fork_system
from .tree_tools import Tree, TreeDecomposition, random_tree, s_cut

__version__ = "0.1.0"
