"""Trimmed means of ratios with bias correction and self-normalized inference.

The point of entry is :func:`estimate` (operating on a sample already scaled
into the unit interval) and the sklearn-style wrapper
:class:`TrimmedRatioEstimator`, which also handles rescaling and the
rate-based default trimming threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import ValidationError, VarianceFloorError
from .sieve import CONDITION_WARNING, SieveRegression, _check_orders
from .validation import as_float_1d, check_ab, normalize_pairs, readonly

VARIANCE_FLOOR = 1e-12


def trimmed_mean(a, b, h: float) -> float:
    """Mean of (b/a) over the whole sample with ratios below the threshold zeroed.

    An observation with a exactly equal to h is kept; the denominator of the
    average is always the full sample size.
    """
    a, b = check_ab(a, b, unit_interval=False)
    _check_threshold(h)
    keep = (a >= h).astype(float)
    return float(np.mean((b / a) * keep))


def below_threshold_moments(a, h: float, smoothness: int) -> np.ndarray:
    """Scaled empirical moments of the denominator strictly below the threshold.

    Entry j (0-based) is E_n[a^j * 1{a < h}] / (j+1)! for j = 0 .. smoothness-2,
    the weights that convert derivative estimates into a trimming-bias estimate.
    """
    a = as_float_1d(a, "denominators")
    _check_threshold(h)
    if not isinstance(smoothness, (int, np.integer)) or smoothness < 2:
        raise ValidationError(f"smoothness must be an integer >= 2, got {smoothness!r}")
    below = (a < h).astype(float)
    out = np.empty(smoothness - 1)
    factorial = 1.0
    power = below
    for j in range(smoothness - 1):
        factorial *= j + 1
        out[j] = np.mean(power) / factorial
        power = power * a
    return out


def trimming_bias_estimate(a, h: float, derivatives) -> float:
    """Plug derivative estimates at zero into the bias expansion.

    ``derivatives`` holds the estimated derivatives of the conditional mean
    at zero, orders 1 .. len(derivatives).
    """
    derivatives = as_float_1d(derivatives, "derivatives")
    moments = below_threshold_moments(a, h, derivatives.size + 1)
    return -float(moments @ derivatives)


def default_threshold(n: int, smoothness: int, rate_constant: float = 1.0) -> float:
    """Rate-rule trimming threshold C * n**(-r).

    The admissible exponent window for the threshold is (1/4, 1/(2(k-1))) on
    the n**(-x) scale, which is nonempty only for smoothness k >= 4; r is its
    log-scale midpoint.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not isinstance(smoothness, (int, np.integer)) or smoothness <= 3:
        raise ValidationError(
            "the rate rule needs smoothness >= 4; for smoothness <= 3 the "
            "admissible exponent window is empty, pass a fixed threshold instead"
        )
    if not np.isfinite(rate_constant) or rate_constant <= 0:
        raise ValidationError(f"rate constant must be positive, got {rate_constant!r}")
    exponent = 0.5 * (0.25 + 0.5 / (smoothness - 1))
    return float(rate_constant) * float(n) ** (-exponent)


def resolve_threshold(a, smoothness: int, degree: int, rate_constant: float = 1.0):
    """Rate-rule threshold clamped so at least degree+2 observations survive.

    Returns (h, clamped). The clamp lowers h to the (degree+2)-th largest
    denominator when the nominal rule would leave too few observations for
    the series fit that follows.
    """
    a = as_float_1d(a, "denominators")
    h = default_threshold(int(a.size), smoothness, rate_constant)
    min_kept = int(degree) + 2
    if a.size < min_kept:
        raise ValidationError(f"need at least {min_kept} observations, got {a.size}")
    if np.count_nonzero(a >= h) >= min_kept:
        return h, False
    clamped = float(np.sort(a)[::-1][min_kept - 1])
    return clamped, True


@dataclass(frozen=True)
class ReportDiagnostics:
    """Numerical context attached to every estimate."""

    gram_condition: float
    gram_condition_warning: bool
    variance_floor: bool
    basis: str
    influence: str
    threshold_rule: str
    rate_constant: float | None
    threshold_clamped: bool


@dataclass(frozen=True)
class EstimateReport:
    """Point estimates, inference, and diagnostics of one estimation run."""

    theta_trimmed: float
    bias_hat: float
    theta_corrected: float
    threshold_moments: np.ndarray
    derivatives_at_zero: np.ndarray
    std_error: float
    ci_lower: float
    ci_upper: float
    t_stat: float
    n: int
    n_trimmed: int
    h: float
    smoothness: int
    degree: int
    confidence_level: float
    null_value: float
    normalization_scale: float
    diagnostics: ReportDiagnostics

    def confidence_interval(self) -> tuple[float, float]:
        return (self.ci_lower, self.ci_upper)


def _check_threshold(h) -> float:
    h = float(h)
    if not np.isfinite(h) or not 0.0 <= h < 1.0:
        raise ValidationError(f"trimming threshold must lie in [0, 1), got {h!r}")
    return h


def estimate(
    a,
    b,
    *,
    smoothness: int,
    degree: int,
    h: float,
    basis: str = "shifted",
    influence: str = "sandwich",
    confidence_level: float = 0.95,
    null_value: float = 0.0,
    normalization_scale: float = 1.0,
    threshold_rule: str = "fixed",
    rate_constant: float | None = None,
    threshold_clamped: bool = False,
) -> EstimateReport:
    """Bias-corrected trimmed mean of b/a with a normal-quantile interval.

    Parameters
    ----------
    a, b : arrays
        Paired sample; a must already lie in (0, 1].
    smoothness : int
        Assumed differentiability order k of the conditional mean of b given
        a near zero; the correction uses derivative orders 1 .. k-1.
    degree : int
        Basis degree K >= smoothness of the series fit, which always uses
        the full sample, trimmed observations included.
    h : float in [0, 1)
        Trimming threshold. Observations with a >= h enter the trimmed mean;
        observations with a < h feed the correction weights.

    Returns
    -------
    EstimateReport
        The corrected point estimate theta_trimmed - bias_hat holds exactly
        by construction, together with the self-normalized standard error,
        the confidence interval, and diagnostics.

    Raises
    ------
    ValidationError
        Invalid sample or configuration, or fewer than two kept observations.
    DegenerateDesignError
        Gram condition number beyond the reliability gate.
    VarianceFloorError
        The variance of the centered statistic is numerically zero; the
        asymptotic approximation requires it bounded away from zero.
    """
    a, b = check_ab(a, b, unit_interval=True)
    h = _check_threshold(h)
    if not 0.0 < confidence_level < 1.0:
        raise ValidationError(f"confidence level must lie in (0, 1), got {confidence_level!r}")
    degree, smoothness = _check_orders(degree, smoothness)

    n = a.size
    keep = (a >= h).astype(float)
    n_trimmed = int(n - np.count_nonzero(keep))
    if n - n_trimmed < 2:
        raise ValidationError(
            f"only {n - n_trimmed} observation(s) survive the threshold h={h:g}; "
            "at least 2 are required"
        )

    model = SieveRegression(
        degree=degree, smoothness=smoothness, basis=basis, influence=influence
    ).fit(a, b)

    ratio = b / a
    theta_trimmed = float(np.mean(ratio * keep))
    moments = below_threshold_moments(a, h, smoothness)
    bias_hat = -float(moments @ model.derivatives_at_zero_)
    theta_corrected = theta_trimmed - bias_hat

    centered = ratio * keep + model.influence_matrix() @ moments
    var_z = float(np.mean(centered * centered) - np.mean(centered) ** 2)
    if var_z < VARIANCE_FLOOR:
        raise VarianceFloorError(
            f"variance of the centered statistic is {var_z:.3e}, below the floor "
            f"{VARIANCE_FLOOR:.0e}; the normal approximation requires it bounded "
            "away from zero"
        )
    std_error = float(np.sqrt(var_z / n))
    quantile = float(norm.ppf(0.5 * (1.0 + confidence_level)))

    diagnostics = ReportDiagnostics(
        gram_condition=model.gram_condition_,
        gram_condition_warning=model.gram_condition_ > CONDITION_WARNING,
        variance_floor=False,
        basis=basis,
        influence=influence,
        threshold_rule=threshold_rule,
        rate_constant=rate_constant,
        threshold_clamped=threshold_clamped,
    )
    return EstimateReport(
        theta_trimmed=theta_trimmed,
        bias_hat=bias_hat,
        theta_corrected=theta_corrected,
        threshold_moments=readonly(moments),
        derivatives_at_zero=readonly(model.derivatives_at_zero_),
        std_error=std_error,
        ci_lower=theta_corrected - quantile * std_error,
        ci_upper=theta_corrected + quantile * std_error,
        t_stat=(theta_corrected - float(null_value)) / std_error,
        n=n,
        n_trimmed=n_trimmed,
        h=h,
        smoothness=smoothness,
        degree=degree,
        confidence_level=float(confidence_level),
        null_value=float(null_value),
        normalization_scale=float(normalization_scale),
        diagnostics=diagnostics,
    )


class TrimmedRatioEstimator(BaseEstimator):
    """Sklearn-style front end for the bias-corrected trimmed ratio mean.

    ``fit(X, y)`` takes denominators X and numerators y on their raw scale,
    rescales both by max(X) when needed (the estimand is unchanged), resolves
    the trimming threshold, and stores the resulting report.

    Parameters
    ----------
    smoothness, degree : int
        Orders of the bias correction and of the series basis.
    threshold : "auto" or float in [0, 1)
        Fixed trimming threshold on the normalized scale, or "auto" for the
        rate rule C * n**(-r) with a survival clamp.
    rate_constant : float
        The constant C of the rate rule; ignored for a fixed threshold.
    basis : {"shifted", "literal"}
    influence : {"sandwich", "literal"}
    confidence_level : float in (0, 1)
    null_value : float
        Hypothesized value for the reported t statistic.

    Attributes
    ----------
    report_ : EstimateReport
    theta_ : float
        Bias-corrected point estimate.
    std_error_, ci_, t_stat_, threshold_, n_trimmed_, normalization_scale_
    """

    def __init__(
        self,
        smoothness: int = 4,
        degree: int = 6,
        threshold="auto",
        rate_constant: float = 1.0,
        basis: str = "shifted",
        influence: str = "sandwich",
        confidence_level: float = 0.95,
        null_value: float = 0.0,
    ):
        self.smoothness = smoothness
        self.degree = degree
        self.threshold = threshold
        self.rate_constant = rate_constant
        self.basis = basis
        self.influence = influence
        self.confidence_level = confidence_level
        self.null_value = null_value

    def fit(self, X, y):
        a, b, scale = normalize_pairs(X, y)
        if self.threshold == "auto":
            h, clamped = resolve_threshold(
                a, self.smoothness, self.degree, self.rate_constant
            )
            rule, constant = "rate", float(self.rate_constant)
        else:
            h = _check_threshold(self.threshold)
            rule, constant, clamped = "fixed", None, False
        self.report_ = estimate(
            a,
            b,
            smoothness=self.smoothness,
            degree=self.degree,
            h=h,
            basis=self.basis,
            influence=self.influence,
            confidence_level=self.confidence_level,
            null_value=self.null_value,
            normalization_scale=scale,
            threshold_rule=rule,
            rate_constant=constant,
            threshold_clamped=clamped,
        )
        self.theta_ = self.report_.theta_corrected
        self.std_error_ = self.report_.std_error
        self.ci_ = self.report_.confidence_interval()
        self.t_stat_ = self.report_.t_stat
        self.threshold_ = h
        self.n_trimmed_ = self.report_.n_trimmed
        self.normalization_scale_ = scale
        return self

    def confidence_interval(self) -> tuple[float, float]:
        if not hasattr(self, "report_"):
            raise NotFittedError("this TrimmedRatioEstimator instance is not fitted yet")
        return self.ci_
