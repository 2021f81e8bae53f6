"""Tikhonov-Fenichel reduction of slow-fast polynomial and mass-action systems."""

from .crn import (
    analyze_structure,
    build_stoich,
    conservation_laws,
    left_kernel_basis,
    split_slow_fast,
)
from .manifold import (
    Parameterization,
    complex_balanced_state,
    dphi,
    find_noninteracting_sets,
    monomial_parameterization,
    rational_parameterization,
    user_parameterization,
    verify_parameterization,
)
from .model import Model, load_model, parse_model, validate_model
from .reduce import (
    complex_balanced_reduced,
    compute_R_general,
    compute_R_graph_case,
    compute_R_via_L,
    decompose_P_mu,
    projection_Q,
    reduced_system,
    stability_analysis,
)
from .sim import convergence_study, integrate_full, integrate_reduced

__version__ = "0.1.0"

__all__ = [
    "Model",
    "Parameterization",
    "analyze_structure",
    "build_stoich",
    "complex_balanced_reduced",
    "complex_balanced_state",
    "compute_R_general",
    "compute_R_graph_case",
    "compute_R_via_L",
    "conservation_laws",
    "convergence_study",
    "decompose_P_mu",
    "dphi",
    "find_noninteracting_sets",
    "integrate_full",
    "integrate_reduced",
    "left_kernel_basis",
    "load_model",
    "monomial_parameterization",
    "parse_model",
    "projection_Q",
    "rational_parameterization",
    "reduced_system",
    "split_slow_fast",
    "stability_analysis",
    "user_parameterization",
    "validate_model",
    "verify_parameterization",
]
