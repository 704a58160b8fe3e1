"""Directed vertex multicut: randomized level cuts, reductions and exact oracles."""

from .cutter import AlgoConfig, CutResult, RunTrace, gupta_baseline, random_level_cut, val, vertex_cut_main
from .fraccut import (
    FractionalCutFamily,
    LPResult,
    capped_cut_value,
    capped_cut_weights,
    fractional_multicut,
    mass,
    min_capped_vertex_cut,
)
from .graph import (
    CutSet,
    DirectedGraph,
    ExplicitPairs,
    FlavorError,
    Instance,
    Threshold,
    check_cut,
    reachable_avoiding,
    vdist_unweighted,
    vdist_weighted,
)
from .instances import GeneratorSpec, ParseError, gen_figure1, gen_layered, gen_path, gen_random_dag, parse, serialize
from .oracle import (
    BudgetExceeded,
    OracleReport,
    empirical_gap,
    exact_fractional_multicut_small,
    exact_integral_multicut,
    menger_min_vertex_cut,
)
from .reductions import (
    ReductionMapping,
    edge_to_vertex,
    heavy_node_preprocess,
    to_uniform_weights,
    to_unit_costs,
    vertex_to_edge,
)
from .simplex import Infeasible, SolverStall

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "BudgetExceeded",
    "capped_cut_value",
    "capped_cut_weights",
    "check_cut",
    "CutResult",
    "CutSet",
    "DirectedGraph",
    "edge_to_vertex",
    "empirical_gap",
    "exact_fractional_multicut_small",
    "exact_integral_multicut",
    "ExplicitPairs",
    "FlavorError",
    "fractional_multicut",
    "FractionalCutFamily",
    "gen_figure1",
    "gen_layered",
    "gen_path",
    "gen_random_dag",
    "GeneratorSpec",
    "gupta_baseline",
    "heavy_node_preprocess",
    "Infeasible",
    "Instance",
    "LPResult",
    "mass",
    "menger_min_vertex_cut",
    "min_capped_vertex_cut",
    "OracleReport",
    "parse",
    "ParseError",
    "random_level_cut",
    "reachable_avoiding",
    "ReductionMapping",
    "RunTrace",
    "serialize",
    "SolverStall",
    "Threshold",
    "to_uniform_weights",
    "to_unit_costs",
    "val",
    "vdist_unweighted",
    "vdist_weighted",
    "vertex_cut_main",
    "vertex_to_edge",
]
