"""Simulation laboratory for a stochastic delayed SIRS epidemic model."""

__version__ = "0.1.0"

from .core import (ModelParams, ParameterError, basic_reproduction_number,
                   check_disease_free_conditions, check_ergodic_conditions,
                   deterministic_drift, equilibria)
from .engine import (HistorySegment, SimConfig, Trajectory,
                     brownian_increments, em_step, simulate_comparison,
                     simulate_path, simulate_reduced_total)
from .ensemble import (EnsembleConfig, EnsembleSummary, occupation_measure,
                       run_ensemble, time_average_functional)
from .incidence import (AssumptionAConstants, IncidenceSpec,
                        assumption_a_constants, evaluate_incidence)
from .stats import gaussian_kde, ks_distance, mean_ci, total_variation

__all__ = [
    "ModelParams", "ParameterError", "basic_reproduction_number",
    "check_disease_free_conditions", "check_ergodic_conditions",
    "deterministic_drift", "equilibria",
    "HistorySegment", "SimConfig", "Trajectory", "brownian_increments",
    "em_step", "simulate_comparison", "simulate_path",
    "simulate_reduced_total",
    "EnsembleConfig", "EnsembleSummary", "occupation_measure",
    "run_ensemble", "time_average_functional",
    "AssumptionAConstants", "IncidenceSpec", "assumption_a_constants",
    "evaluate_incidence",
    "gaussian_kde", "ks_distance", "mean_ci", "total_variation",
]
