"""Discoverability analysis of dynamical systems from trajectory data."""
from . import catalog
from .analysis import AnalysisConfig, UniquenessVerdict, analyze
from .conservation import hessian_test, kernel_inclusion_test, symmetry_class
from .core import (
    DiscoverabilityError,
    Domain,
    NumericalError,
    PolynomialField,
    Rescaling,
    Trajectory,
    ValidationError,
    VectorField,
    eval_field,
    eval_jacobian,
)
from .coverage import box_cover, cell_decomposition, density_verdict, transitivity_graph
from .dimension import box_counting_dimension, correlation_dimension, dimension_criterion
from .ideal import alternative_field, find_first_integral, find_vanishing, monomial_matrix
from .integrate import IntegratorConfig, check_trapping, flow, flow_to
from .polynomial import MonomialBasis, Polynomial
from .report import report

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "DiscoverabilityError", "Domain", "IntegratorConfig", "MonomialBasis",
    "NumericalError", "Polynomial", "PolynomialField", "Rescaling", "Trajectory", "UniquenessVerdict",
    "ValidationError", "VectorField", "alternative_field", "analyze", "box_counting_dimension",
    "box_cover", "catalog", "cell_decomposition", "check_trapping", "correlation_dimension",
    "density_verdict", "dimension_criterion", "eval_field", "eval_jacobian", "find_first_integral",
    "find_vanishing", "flow", "flow_to", "hessian_test", "kernel_inclusion_test", "monomial_matrix",
    "report", "symmetry_class", "transitivity_graph",
]
