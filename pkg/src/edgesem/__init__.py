"""Edge interventions in linear Gaussian structural equation models."""

from .constraints import derive_constraints, eval_gadget, eval_verma, plan_removals, residual_of_plan
from .errors import EdgeSemError, NotIdentifiable, NumericalError, ValidationError
from .graph import Admg
from .identify import (
    IdentifiabilityReport,
    check_add_directed,
    check_remove_bidirected,
    check_remove_directed,
    identify_lambda,
    identify_omega,
    identify_path_sum,
    identify_path_sum_cutvertex,
)
from .intervene import InterventionResult, add_directed, remove_bidirected, remove_directed
from .sem import CovMatrix, Dataset, SemParameters, covariance_from_params, sample_cov, simulate
from .treks import BACKEND, covariance_via_treks, enumerate_treks

__version__ = "0.1.0"

__all__ = [
    "Admg",
    "BACKEND",
    "CovMatrix",
    "Dataset",
    "EdgeSemError",
    "IdentifiabilityReport",
    "InterventionResult",
    "NotIdentifiable",
    "NumericalError",
    "SemParameters",
    "ValidationError",
    "add_directed",
    "check_add_directed",
    "check_remove_bidirected",
    "check_remove_directed",
    "covariance_from_params",
    "covariance_via_treks",
    "derive_constraints",
    "enumerate_treks",
    "eval_gadget",
    "eval_verma",
    "identify_lambda",
    "identify_omega",
    "identify_path_sum",
    "identify_path_sum_cutvertex",
    "plan_removals",
    "remove_bidirected",
    "remove_directed",
    "residual_of_plan",
    "sample_cov",
    "simulate",
]
