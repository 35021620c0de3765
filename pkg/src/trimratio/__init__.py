"""Trimmed means of ratios with bias correction and robust inference.

Observations with small denominators dominate the variance of a naive mean
of ratios; trimming them away trades that variance for bias. This package
estimates the trimming bias from the smoothness of the conditional mean of
the numerator given the denominator, corrects it, and delivers
self-normalized confidence intervals, together with an exact quadrature
oracle and a replication harness that verify the construction numerically.
"""

from .basis import (
    MAX_DEGREE,
    LegendreBasis,
    legendre_derivative_design,
    legendre_design,
    orthonormality_residual,
)
from .dgp import DgpTruth, GammaNormalDgp, dgp_truth, sample_dgp
from .errors import (
    DegenerateDesignError,
    NumericalError,
    QuadratureError,
    ValidationError,
    VarianceFloorError,
)
from .estimator import (
    EstimateReport,
    TrimmedRatioEstimator,
    below_threshold_moments,
    default_threshold,
    estimate,
    resolve_threshold,
    trimmed_mean,
    trimming_bias_estimate,
)
from .montecarlo import (
    EstimatorSummary,
    MonteCarloReport,
    ks_distance_to_standard_normal,
    replication_rng,
    run_replications,
    t_stat_normality,
)
from .oracle import (
    BUILTIN_DESIGNS,
    BiasDecomposition,
    Design,
    exact_trim_bias,
    gamma_design,
    named_design,
    uniform_design,
    var_trimmed_rate,
)
from .sieve import SieveRegression
from .validation import check_ab, normalize_pairs

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_DESIGNS",
    "BiasDecomposition",
    "Design",
    "DegenerateDesignError",
    "DgpTruth",
    "EstimateReport",
    "EstimatorSummary",
    "GammaNormalDgp",
    "LegendreBasis",
    "MAX_DEGREE",
    "MonteCarloReport",
    "NumericalError",
    "QuadratureError",
    "SieveRegression",
    "TrimmedRatioEstimator",
    "ValidationError",
    "VarianceFloorError",
    "below_threshold_moments",
    "check_ab",
    "default_threshold",
    "dgp_truth",
    "estimate",
    "exact_trim_bias",
    "gamma_design",
    "ks_distance_to_standard_normal",
    "legendre_derivative_design",
    "legendre_design",
    "named_design",
    "normalize_pairs",
    "orthonormality_residual",
    "replication_rng",
    "resolve_threshold",
    "run_replications",
    "sample_dgp",
    "t_stat_normality",
    "trimmed_mean",
    "trimming_bias_estimate",
    "uniform_design",
    "var_trimmed_rate",
]
