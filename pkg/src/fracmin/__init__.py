"""Exact discrete fractional-perimeter minimisers on lattices."""
from .energy import (EnergyBreakdown, FuncConfig, SetConfig, coarea_check, cutoff, g_energy,
                     g_tilde, global_tail, indicator, local_tail, perimeter, seminorm,
                     split_parts)
from .errors import InvariantError
from .kernel import Ambient, WeightTable, kernel_weight
from .lattice import LatticeSpec, Region, ball_region, build_box, diameter, ring_region
from .levelset import (assemble_function, build_level_family, competitor_test,
                       verify_function_minimality)
from .optimise import MinimiserPair, brute_force, build_cut_problem, minimise, solve_mincut

__version__ = "0.1.0"

__all__ = [
    "Ambient", "EnergyBreakdown", "FuncConfig", "InvariantError", "LatticeSpec",
    "MinimiserPair", "Region", "SetConfig", "WeightTable", "assemble_function",
    "ball_region", "brute_force", "build_box", "build_cut_problem", "build_level_family",
    "coarea_check", "competitor_test", "cutoff", "diameter", "g_energy", "g_tilde",
    "global_tail", "indicator", "kernel_weight", "local_tail", "minimise", "perimeter",
    "ring_region", "seminorm", "solve_mincut", "split_parts", "verify_function_minimality",
]
