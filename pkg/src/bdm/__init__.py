"""Bayesian discrepancy measure, the threshold test built on it, and the FBST e-value."""

from .discrepancy import (
    Decision,
    DiscrepancyResult,
    Threshold,
    bdt_decide,
    hypothesis_bdm,
    partition_bdm,
    scalar_bdm,
)
from .fbst import NullCurve, ReferenceFunction, e_value_mc, e_value_scalar
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .numerics import DomainError, Interval, NonConvergenceError, QuadratureSpec, RngStream
from .posteriors import (
    JointPosterior,
    PartitioningHypothesis,
    ScalarPosterior,
    partition_probabilities,
)

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "DiscrepancyResult",
    "DomainError",
    "Interval",
    "JointPosterior",
    "KERNEL_IMPLEMENTATION",
    "NonConvergenceError",
    "NullCurve",
    "PartitioningHypothesis",
    "QuadratureSpec",
    "ReferenceFunction",
    "RngStream",
    "ScalarPosterior",
    "Threshold",
    "bdt_decide",
    "e_value_mc",
    "e_value_scalar",
    "hypothesis_bdm",
    "partition_bdm",
    "partition_probabilities",
    "scalar_bdm",
]
