"""Executable checks for Sidon-type inequalities, the QC-norm, Rademacher
sums, Walsh systems and Hadamard matrices."""

__version__ = "0.1.0"

from .errors import CapExceededError, HypothesisError
from .trigpoly import (
    NormEnclosure,
    TrigPoly,
    dyadic_block,
    dyadic_blocks,
    evaluate,
    grid_values,
    multiply,
    norm_l1,
    norm_l2_exact,
    norm_sup,
)
from .rademacher import (
    SignDistribution,
    exact_sum_distribution,
    khintchine_l1_ratio,
    khintchine_tail_check,
    max_partial_ratio,
    rademacher_value,
)
from .qc import QCEstimate, log_poly, oskolkov_poly, qc_exact, qc_monte_carlo
from .sidon import (
    LacunarySequence,
    ModulatedPolynomialFamily,
    admissible_degrees,
    assemble_modulated,
    gamma_bound,
    riesz_product,
    sidon_ratio,
    split_lacunary,
    validate_lacunary,
)
from .walsh import (
    DiscreteSystem,
    StepFunction,
    corollary_bicontrol_check,
    discrete_sidon_check,
    step_integrate,
    verify_system_conditions,
    walsh_function,
    walsh_sidon_check,
    walsh_system,
)
from .hadamard import HadamardMatrix, construct, double, paley1, paley2, sylvester, system_from_tower, verify
