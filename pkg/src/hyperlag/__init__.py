"""Lagrangians of r-uniform hypergraphs and exhaustive checks of clique-type results."""
from .hypergraph import (
    GraphFormatError,
    RUniformGraph,
    colex_compare,
    colex_initial_segment,
    colex_rank,
    colex_unrank,
    complete_graph,
    compress,
    is_left_compressed,
    link,
    link_difference,
    load_graph,
    max_clique_order,
)
from .solver import (
    LagrangianEstimate,
    SimplexWeighting,
    SolverConfig,
    baum_eagon_step,
    brute_force_oracle,
    complete_lagrangian,
    evaluate,
    link_values,
    maximize,
    structural_weight_checks,
    verify_frankl_rodl,
)

__version__ = "0.1.0"
