"""Finite lacunary SU(1,1) trigonometric products and desk-scale checks of their convergence theory."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    DivergentIntegralError,
    DomainError,
    FrequencyOverflowError,
    GridTooCoarseError,
    InvalidInputError,
    LacunaryError,
)
from .su11 import IDENTITY, CoefficientPair, SU11Matrix, from_f, make_coefficient, mul, op_norm, rho, rho_explicit
from .trigpoly import TrigPoly, autocorrelation, multiply
from .product import (
    CoefficientSequence,
    LacunarySequence,
    TrigPolyPair,
    centered_identity,
    energy_identity,
    min_gap_check,
    nonlinear_parseval,
    partial_product,
    pointwise_product,
    s_mn,
    shifted_energy,
)
from .metric import TorusGrid, c_p, cauchy_bound_check, d_p_between, d_p_identity, d_p_window
from .representations import (
    PartitionTriple,
    SignedRepresentation,
    autocorrelation_bound_check,
    classify_partition,
    enumerate_representations,
    multiplicity_bound_check,
    uniqueness_check,
)
from .experiments import (
    CoefficientSpec,
    ExperimentConfig,
    generate_coefficients,
    generate_lacunary,
    theorem1_experiment,
    theorem2_experiment,
    theorem3_experiment,
)
