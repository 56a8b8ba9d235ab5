"""Markov moves, fiber connectivity and Metropolis sampling for bounded and
incomplete contingency tables."""
from .core import (BoundsGrid, CellBound, DesignMatrix, FiberSpec, Shape, Table, margins,
                   quasi_independence_design, satisfies_bounds, two_way_design)
from .fiber import (ConnectivityReport, Fiber, FiberTooLarge, PatternVerdict, SubbasisVerdict,
                    connectivity, enumerate_fiber, pattern_search, verify_subbasis)
from .lattice import (CapExceeded, LiftSpec, TermOrder, circuits_general, graver_basis,
                      kernel_basis, lawrence_lift, partial_lawrence_lift, universal_markov_basis)
from .moves import (Move, MoveSet, apply_move, basic_moves, circuit_moves, count_circuits,
                    df1_loops, filter_structural_zeros, loop_move)
from .sampler import (ChainConfig, ChainResult, Custom, Hypergeometric, Uniform,
                      chi_square_uniformity, ds_step, run_chain, run_chains, transition_matrix)

__version__ = "0.1.0"

__all__ = [
    "BoundsGrid", "CellBound", "DesignMatrix", "FiberSpec", "Shape", "Table", "margins",
    "quasi_independence_design", "satisfies_bounds", "two_way_design", "ConnectivityReport",
    "Fiber", "FiberTooLarge", "PatternVerdict", "SubbasisVerdict", "connectivity",
    "enumerate_fiber", "pattern_search", "verify_subbasis", "CapExceeded", "LiftSpec",
    "TermOrder", "circuits_general", "graver_basis", "kernel_basis", "lawrence_lift",
    "partial_lawrence_lift", "universal_markov_basis", "Move", "MoveSet", "apply_move",
    "basic_moves", "circuit_moves", "count_circuits", "df1_loops",
    "filter_structural_zeros", "loop_move", "ChainConfig", "ChainResult", "Custom",
    "Hypergeometric", "Uniform", "chi_square_uniformity", "ds_step", "run_chain",
    "run_chains", "transition_matrix",
]
