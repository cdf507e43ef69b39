"""Constrained non-monotone submodular maximization with exact small-instance oracles."""
from .aided import Schedule, aided_mcg, measured_continuous_greedy
from .bench import run_algorithm, run_benchmark
from .brute import brute_force_opt
from .extensions import (
    Multilinear,
    estimate_multilinear,
    estimate_weight,
    exact_multilinear,
    lovasz_value,
    partial_derivative_exact,
    sample_random_subset,
)
from .instances import InstanceSpec, generate_instance
from .local_search import LocalSearchConfig, check_exchange_inequality, fractional_local_search
from .pipeline import MainParams, main_algorithm, optimize_parameters, theorem3_bound
from .polytopes import Box, Cardinality, GraphicMatroid, Knapsack, Matroid, PartitionMatroid, normalize_ground_set
from .setfn import (
    Coverage,
    DirectedCut,
    FacilityLocation,
    GraphCut,
    SetFunction,
    SizeError,
    TableFunction,
    check_submodular_nonneg,
)
from .verify import GuaranteeReport, verify_run

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Cardinality",
    "Coverage",
    "DirectedCut",
    "FacilityLocation",
    "GraphCut",
    "GraphicMatroid",
    "GuaranteeReport",
    "InstanceSpec",
    "Knapsack",
    "LocalSearchConfig",
    "MainParams",
    "Matroid",
    "Multilinear",
    "PartitionMatroid",
    "Schedule",
    "SetFunction",
    "SizeError",
    "TableFunction",
    "aided_mcg",
    "brute_force_opt",
    "check_exchange_inequality",
    "check_submodular_nonneg",
    "estimate_multilinear",
    "estimate_weight",
    "exact_multilinear",
    "fractional_local_search",
    "generate_instance",
    "lovasz_value",
    "main_algorithm",
    "measured_continuous_greedy",
    "normalize_ground_set",
    "optimize_parameters",
    "partial_derivative_exact",
    "run_algorithm",
    "run_benchmark",
    "sample_random_subset",
    "theorem3_bound",
    "verify_run",
]
