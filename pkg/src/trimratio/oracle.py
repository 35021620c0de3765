"""Quadrature ground truth for trimming bias and population quantities.

Everything here is computed from a known design (denominator density plus
conditional-mean function with its analytic derivatives), independently of
the sample-based estimator, so it can serve as the reference the estimator
is tested against. Integrals over the small-denominator region apply the
substitution u = a**p when the density behaves like a**(p-1) with p < 1 at
zero, which removes the integrable endpoint singularity of heavy
small-denominator designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .dgp import GammaNormalDgp, dgp_truth
from .errors import NumericalError, QuadratureError, ValidationError
from .validation import as_float_1d, readonly

QUAD_ABS_TOL = 1e-10
QUAD_SUBDIVISIONS = 2000

_FD_STEP = 1e-5
_FD_TOL = 1e-6
_FD_PROBES = (0.15, 0.35, 0.55, 0.75)


def _quad(fn, lo, hi, *, epsabs=QUAD_ABS_TOL, epsrel=1e-9) -> float:
    out = quad(fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=QUAD_SUBDIVISIONS, full_output=1)
    if len(out) > 3:
        raise QuadratureError(
            f"quadrature on [{lo:g}, {hi:g}] did not converge "
            f"(achieved absolute error {out[1]:.3e}): {out[3]}"
        )
    return float(out[0])


@dataclass(frozen=True)
class Design:
    """Known joint design of the denominator and the conditional mean.

    ``mean_derivatives[j]`` is the analytic derivative of order j+1 of the
    conditional mean. ``density_power`` is the exponent p such that the
    density behaves like a**(p-1) near zero (1.0 for densities bounded at
    zero); it selects the substitution used for small-denominator integrals.
    ``tail_mass_above_one`` records the density mass beyond the unit interval
    for designs whose support exceeds it (the estimator rescales data, the
    oracle integrates the full support).
    """

    density: Callable[[float], float]
    mean_fn: Callable[[float], float]
    mean_derivatives: Sequence[Callable[[float], float]]
    density_power: float = 1.0
    name: str = ""
    tail_mass_above_one: float | None = None

    def derivative(self, order: int) -> Callable[[float], float]:
        if not 1 <= order <= len(self.mean_derivatives):
            raise ValidationError(
                f"derivative order {order} not available; design supplies "
                f"orders 1 .. {len(self.mean_derivatives)}"
            )
        return self.mean_derivatives[order - 1]

    def validate(self, smoothness: int) -> "Design":
        if len(self.mean_derivatives) < smoothness:
            raise ValidationError(
                f"design must supply derivatives up to order {smoothness}, "
                f"got {len(self.mean_derivatives)}"
            )
        if self.density_power <= 0:
            raise ValidationError("density_power must be positive")
        if abs(float(self.mean_fn(0.0))) > 1e-10:
            raise ValidationError("the conditional mean must vanish at zero")
        for probe in _FD_PROBES:
            lower: Callable[[float], float] = self.mean_fn
            for order in range(1, smoothness + 1):
                fd = (lower(probe + _FD_STEP) - lower(probe - _FD_STEP)) / (2.0 * _FD_STEP)
                analytic = float(self.derivative(order)(probe))
                if abs(fd - analytic) > _FD_TOL * (1.0 + abs(analytic)):
                    raise ValidationError(
                        f"derivative of order {order} disagrees with finite "
                        f"differences at a={probe:g} ({analytic:g} vs {fd:g})"
                    )
                lower = self.derivative(order)
        return self


def _below_threshold_integral(design: Design, h: float, fn) -> float:
    """Integral over (0, h) of fn(a) against the design density."""
    p = design.density_power
    if p >= 1.0:
        return _quad(lambda a: fn(a) * design.density(a), 0.0, h)

    def transformed(u):
        a = u ** (1.0 / p)
        return fn(a) * design.density(a) * a ** (1.0 - p) / p

    return _quad(transformed, 0.0, h**p)


@dataclass(frozen=True)
class BiasDecomposition:
    """Exact trimming bias split into expansion terms plus a remainder."""

    main_terms: np.ndarray
    remainder: float
    total: float
    identity_gap: float


def exact_trim_bias(
    design: Design, h: float, smoothness: int, *, identity_tol: float = 1e-8
) -> BiasDecomposition:
    """Exact bias of trimming at h under the given design.

    main_terms[j] is the contribution of derivative order j+1 of the
    conditional mean at zero; the remainder carries the derivative of order
    ``smoothness`` through a nested integral. ``total`` is evaluated
    independently as the small-denominator mass of the ratio mean, and the
    identity total = sum(main_terms) + remainder is verified within
    ``identity_tol``.
    """
    if not isinstance(smoothness, (int, np.integer)) or smoothness < 2:
        raise ValidationError(f"smoothness must be an integer >= 2, got {smoothness!r}")
    h = float(h)
    if not 0.0 < h < 1.0:
        raise ValidationError(f"threshold must lie in (0, 1), got {h!r}")
    design.validate(int(smoothness))
    k = int(smoothness)

    main = np.empty(k - 1)
    for order in range(1, k):
        weight = _below_threshold_integral(design, h, lambda a, j=order: a ** (j - 1))
        main[order - 1] = weight * float(design.derivative(order)(0.0)) / math.factorial(order)

    top = design.derivative(k)

    def inner(a: float) -> float:
        return _quad(lambda t: (1.0 - t) ** (k - 1) * top(t * a), 0.0, 1.0, epsabs=1e-12)

    remainder = _below_threshold_integral(
        design, h, lambda a: a ** (k - 1) * inner(a)
    ) / math.factorial(k - 1)

    total = _below_threshold_integral(design, h, lambda a: design.mean_fn(a) / a)

    gap = abs(total - float(np.sum(main)) - remainder)
    if gap > identity_tol:
        raise NumericalError(
            f"bias decomposition identity fails: |total - terms - remainder| = "
            f"{gap:.3e} exceeds {identity_tol:.0e}"
        )
    return BiasDecomposition(
        main_terms=readonly(main), remainder=remainder, total=total, identity_gap=gap
    )


def gamma_density(alpha: float, beta: float) -> Callable[[float], float]:
    """Gamma(shape, scale) probability density."""
    log_norm = gammaln(alpha) + alpha * math.log(beta)

    def pdf(a):
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(
                a > 0, np.exp((alpha - 1.0) * np.log(np.maximum(a, 1e-300)) - a / beta - log_norm), 0.0
            )
        return out if out.ndim else float(out)

    return pdf


def var_trimmed_rate(dgp: GammaNormalDgp, h_grid) -> float:
    """Log-log slope of the trimmed-ratio variance against the threshold.

    For each h, Var((B/A) * 1{A >= h}) is computed by quadrature of the
    conditional first and second ratio moments against the Gamma density
    over [h, infinity); the fitted slope of log variance on log h is
    returned. In the heavy regime alpha + d < 2 the slope approaches
    -(2 - alpha - d) as h shrinks.
    """
    dgp.validate()
    grid = np.sort(as_float_1d(h_grid, "h_grid"))
    if grid.size < 3:
        raise ValidationError(f"h_grid needs at least 3 points, got {grid.size}")
    if np.any(grid <= 0) or np.any(grid >= 0.5):
        raise ValidationError("h_grid values must lie in (0, 0.5)")
    pdf = gamma_density(dgp.alpha, dgp.beta)
    c2 = 0.0 if dgp.noiseless else dgp.c2
    variances = np.empty(grid.size)
    for i, h in enumerate(grid):
        mean = _quad(lambda a: dgp.c1 * pdf(a), h, np.inf)
        second = _quad(lambda a: (dgp.c1**2 + c2 * a ** (dgp.d - 2.0)) * pdf(a), h, np.inf)
        variances[i] = second - mean**2
    if np.any(variances <= 0):
        raise NumericalError("trimmed variance came out nonpositive; quadrature unreliable")
    slope = np.polyfit(np.log(grid), np.log(variances), 1)[0]
    return float(slope)


def uniform_design(
    mean_fn, mean_derivatives, name: str = "uniform"
) -> Design:
    """Design with a Uniform[0, 1] denominator."""
    return Design(
        density=lambda a: 1.0,
        mean_fn=mean_fn,
        mean_derivatives=tuple(mean_derivatives),
        density_power=1.0,
        name=name,
        tail_mass_above_one=0.0,
    )


def gamma_design(alpha: float, beta: float = 1.0, slope: float = 1.0) -> Design:
    """Gamma-denominator design with a linear conditional mean slope * a.

    The density keeps its full support; the mass beyond the unit interval is
    recorded on the design for reporting.
    """
    if alpha <= 0 or beta <= 0:
        raise ValidationError("alpha and beta must be positive")
    pdf = gamma_density(alpha, beta)
    tail = _quad(pdf, 1.0, np.inf)
    zero = lambda a: 0.0  # noqa: E731
    return Design(
        density=pdf,
        mean_fn=lambda a: slope * a,
        mean_derivatives=(lambda a: slope, zero, zero, zero, zero, zero),
        density_power=float(alpha),
        name=f"gamma({alpha:g},{beta:g})-linear",
        tail_mass_above_one=tail,
    )


def _poly_design(coeffs: dict[int, float], name: str) -> Design:
    """Polynomial conditional mean sum(c_j a**j) with vanishing constant term."""

    def deriv(order: int):
        def fn(a):
            return sum(
                c * math.factorial(j) / math.factorial(j - order) * a ** (j - order)
                for j, c in coeffs.items()
                if j >= order
            )

        return fn

    return uniform_design(
        mean_fn=lambda a: sum(c * a**j for j, c in coeffs.items()),
        mean_derivatives=tuple(deriv(order) for order in range(1, 7)),
        name=name,
    )


def named_design(name: str) -> Design:
    """Look up one of the built-in designs used by the command line."""
    builders = {
        "uniform-linear": lambda: _poly_design({1: 1.0}, "uniform-linear"),
        "uniform-quadratic": lambda: _poly_design({2: 1.0}, "uniform-quadratic"),
        "uniform-cubic": lambda: _poly_design({1: 3.0, 3: -2.0}, "uniform-cubic"),
        "uniform-expm1": lambda: uniform_design(
            mean_fn=np.expm1,
            mean_derivatives=(np.exp,) * 6,
            name="uniform-expm1",
        ),
        "gamma-linear": lambda: gamma_design(1.5, 1.0, 1.0),
    }
    if name not in builders:
        raise ValidationError(
            f"unknown design {name!r}; available: {', '.join(sorted(builders))}"
        )
    return builders[name]()


BUILTIN_DESIGNS = (
    "uniform-linear",
    "uniform-quadratic",
    "uniform-cubic",
    "uniform-expm1",
    "gamma-linear",
)

__all__ = [
    "BiasDecomposition",
    "Design",
    "BUILTIN_DESIGNS",
    "dgp_truth",
    "exact_trim_bias",
    "gamma_density",
    "gamma_design",
    "named_design",
    "uniform_design",
    "var_trimmed_rate",
]
