"""Heavy-tail data generating process: Gamma denominator, Gaussian numerator.

A ~ Gamma(alpha, beta) (shape, scale) and B | A=a ~ Normal(c1*a, c2*a**d)
where c2*a**d is the conditional variance. Under the variance reading the
existence conditions come out exactly: the ratio mean E[B/A] = c1 exists iff
2*alpha + d > 2, and Var(B/A) fails to exist when alpha + d < 2, the regime
where trimming genuinely matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class GammaNormalDgp:
    alpha: float
    beta: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    d: float = 0.0
    noiseless: bool = False

    def validate(self) -> "GammaNormalDgp":
        values = (self.alpha, self.beta, self.c1, self.c2, self.d)
        if not all(np.isfinite(v) for v in values):
            raise ValidationError("all parameters must be finite")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        if self.c2 <= 0:
            raise ValidationError("c2 must be positive (use noiseless=True for zero noise)")
        if self.c1 < 0:
            raise ValidationError("c1 must be nonnegative")
        return self


@dataclass(frozen=True)
class DgpTruth:
    theta: float
    moment_exists: bool
    variance_exists: bool | None  # None when alpha + d == 2 exactly


def dgp_truth(dgp: GammaNormalDgp) -> DgpTruth:
    """Analytic target value and existence flags for the Gamma/Normal model.

    The ratio mean equals c1 whenever it exists. The variance flag is True
    when alpha + d > 2, False when alpha + d < 2, and None at equality.
    A noiseless model has ratio identically c1, so both always exist.
    """
    dgp.validate()
    if dgp.noiseless:
        return DgpTruth(theta=dgp.c1, moment_exists=True, variance_exists=True)
    moment_exists = 2.0 * dgp.alpha + dgp.d > 2.0
    tail_index = dgp.alpha + dgp.d
    if tail_index > 2.0:
        variance_exists: bool | None = True
    elif tail_index < 2.0:
        variance_exists = False
    else:
        variance_exists = None
    return DgpTruth(theta=dgp.c1, moment_exists=moment_exists, variance_exists=variance_exists)


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= _UINT64_MAX:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def draw_sample(dgp: GammaNormalDgp, n: int, rng: np.random.Generator):
    """Draw n pairs from the model using the supplied generator.

    Denominators are returned on their raw Gamma scale; callers normalize
    into the unit interval before estimating. Refuses models whose ratio
    mean does not exist.
    """
    dgp.validate()
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not dgp.noiseless and not dgp_truth(dgp).moment_exists:
        raise ValidationError(
            "the ratio mean does not exist for this model (2*alpha + d <= 2); "
            "refusing to sample"
        )
    a = rng.gamma(dgp.alpha, dgp.beta, size=n)
    while np.any(a <= 0):  # guards against underflow to zero at tiny shapes
        bad = a <= 0
        a[bad] = rng.gamma(dgp.alpha, dgp.beta, size=int(bad.sum()))
    if dgp.noiseless:
        b = dgp.c1 * a
    else:
        b = rng.normal(dgp.c1 * a, np.sqrt(dgp.c2) * a ** (0.5 * dgp.d))
    return a, b


def sample_dgp(dgp: GammaNormalDgp, n: int, seed: int):
    """Deterministic sample of n raw (denominator, numerator) pairs."""
    rng = np.random.default_rng(check_seed(seed))
    return draw_sample(dgp, n, rng)
