"""Finite-dimensional engine for amplitude and positive formulations of quantum theory.

The main entry points are re-exported here; see the submodules for the checks.
"""

from .kernels import BACKEND
from .krein import DoubledSpace, Frame, GradedKreinSpace, Vector, inner, iota, reorder, tau
from .library import (FermionicToyConfig, IntervalTheoryConfig, build_fermionic_toy,
                      build_interval_theory, disjoint_union, random_config)
from .measurement import (MixedState, QueryResult, Subspace, WeightedQuestion, born_recovery,
                          ensemble_expectation, evolve_mixed, hs_transition, mixed_state,
                          observable_expectation, probability)
from .positive import expectation_map, probability_map
from .report import TOL_CONE, TOL_EQ, CheckResult
from .spacetime import Hypersurface, Region, SpacetimeSystem, make_slice
from .suite import run_suite
from .theory import AmplitudeMap, ObservableMap, Theory, TheoryError, dump_theory, load_theory

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "DoubledSpace", "Frame", "GradedKreinSpace", "Vector", "inner", "iota",
    "reorder", "tau", "FermionicToyConfig", "IntervalTheoryConfig", "build_fermionic_toy",
    "build_interval_theory", "disjoint_union", "random_config", "MixedState", "QueryResult",
    "Subspace", "WeightedQuestion", "born_recovery", "ensemble_expectation", "evolve_mixed",
    "hs_transition", "mixed_state", "observable_expectation", "probability", "expectation_map",
    "probability_map", "TOL_CONE", "TOL_EQ", "CheckResult", "Hypersurface", "Region",
    "SpacetimeSystem", "make_slice", "run_suite", "AmplitudeMap", "ObservableMap", "Theory",
    "TheoryError", "dump_theory", "load_theory",
]
