"""Orthonormal Legendre polynomial bases and their derivatives.

Two domain conventions are supported. The default "shifted" basis evaluates
sqrt(2n+1) * P_n(2a - 1), orthonormal under the uniform probability measure
on [0, 1], which matches data whose support is normalized to the unit
interval. The "literal" basis evaluates the classical normalized polynomials
sqrt(2n+1) * P_n(a) without shifting; those are orthonormal under the
uniform probability measure on [-1, 1].

All evaluation goes through the three-term recurrence and its differentiated
form rather than expanded monomial coefficients, which stays stable for the
supported degrees.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ValidationError
from .validation import as_float_1d

MAX_DEGREE = 30

MODES = ("shifted", "literal")


def _check_degree(degree) -> int:
    if not isinstance(degree, (int, np.integer)) or degree < 0:
        raise ValidationError(f"degree must be a non-negative integer, got {degree!r}")
    if degree > MAX_DEGREE:
        raise ValidationError(
            f"degree {degree} exceeds the supported maximum {MAX_DEGREE}; "
            "double-precision conditioning of the downstream regression is "
            "unreliable beyond that"
        )
    return int(degree)


def _check_mode(mode) -> str:
    if mode not in MODES:
        raise ValidationError(f"basis mode must be one of {MODES}, got {mode!r}")
    return mode


def _check_unit_domain(a: np.ndarray) -> None:
    if np.any(a < 0) or np.any(a > 1):
        raise ValidationError(
            f"basis arguments must lie in [0, 1], got values in "
            f"[{np.min(a):g}, {np.max(a):g}]"
        )


def _derivative_table(x, degree: int, max_order: int) -> np.ndarray:
    """Values P_n^(j)(x) of the classical Legendre polynomials.

    Returns an array of shape (max_order+1, degree+1) + shape(x) whose
    [j, n] entry is the j-th derivative of P_n at x. Differentiating the
    Bonnet recurrence n P_n = (2n-1) x P_{n-1} - (n-1) P_{n-2} j times gives
    n P_n^(j) = (2n-1) (x P_{n-1}^(j) + j P_{n-1}^(j-1)) - (n-1) P_{n-2}^(j),
    so entries with n < j come out exactly zero.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((max_order + 1, degree + 1) + x.shape)
    out[0, 0] = 1.0
    if degree >= 1:
        out[0, 1] = x
        if max_order >= 1:
            out[1, 1] = 1.0
    for n in range(2, degree + 1):
        c1 = 2.0 * n - 1.0
        c2 = float(n - 1)
        out[0, n] = (c1 * x * out[0, n - 1] - c2 * out[0, n - 2]) / n
        for j in range(1, max_order + 1):
            out[j, n] = (
                c1 * (x * out[j, n - 1] + j * out[j - 1, n - 1]) - c2 * out[j, n - 2]
            ) / n
    return out


def _scaled_values(a: np.ndarray, degree: int, order: int, mode: str) -> np.ndarray:
    """Orthonormal basis derivative values with the basis index on the last axis."""
    x = 2.0 * a - 1.0 if mode == "shifted" else a
    table = _derivative_table(x, degree, order)[order]
    norm = np.sqrt(2.0 * np.arange(degree + 1) + 1.0)
    if mode == "shifted" and order > 0:
        norm = norm * 2.0**order  # chain rule for the argument 2a - 1
    return np.moveaxis(table, 0, -1) * norm


def legendre_design(a, degree: int, mode: str = "shifted") -> np.ndarray:
    """Evaluate the orthonormal Legendre basis of the given degree.

    Parameters
    ----------
    a : scalar or array in [0, 1]
        Evaluation points.
    degree : int
        Highest polynomial degree; the basis has degree+1 elements.
    mode : {"shifted", "literal"}
        Domain convention, see the module docstring.

    Returns
    -------
    ndarray with the basis index on the last axis; scalar input yields a
    vector of length degree+1.
    """
    degree = _check_degree(degree)
    mode = _check_mode(mode)
    arr = np.asarray(a, dtype=float)
    _check_unit_domain(arr)
    return _scaled_values(arr, degree, 0, mode)


def legendre_derivative_design(a, degree: int, order: int, mode: str = "shifted") -> np.ndarray:
    """Derivative of each basis element, same layout as ``legendre_design``.

    Elements of polynomial degree below ``order`` are exactly zero. In
    shifted mode the values include the chain-rule factor 2**order.
    """
    degree = _check_degree(degree)
    mode = _check_mode(mode)
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValidationError(f"derivative order must be a positive integer, got {order!r}")
    arr = np.asarray(a, dtype=float)
    _check_unit_domain(arr)
    return _scaled_values(arr, degree, int(order), mode)


def orthonormality_residual(degree: int, mode: str = "shifted", nodes: int | None = None) -> float:
    """Max-abs deviation of the basis Gram matrix from the identity.

    The inner product uses the uniform probability measure of the mode's
    natural interval ([0, 1] shifted, [-1, 1] literal) evaluated by
    Gauss-Legendre quadrature, exact for polynomial products of this degree.
    """
    degree = _check_degree(degree)
    mode = _check_mode(mode)
    if nodes is None:
        nodes = 2 * degree + 2
    x, w = np.polynomial.legendre.leggauss(nodes)
    if mode == "shifted":
        pts = 0.5 * (x + 1.0)
        wts = 0.5 * w
    else:
        pts = x
        wts = 0.5 * w
    design = _scaled_values(pts, degree, 0, mode)
    gram = (design * wts[:, None]).T @ design
    return float(np.max(np.abs(gram - np.eye(degree + 1))))


class LegendreBasis(TransformerMixin, BaseEstimator):
    """Feature map onto the orthonormal Legendre basis.

    ``transform`` returns the (n, degree+1) design matrix; with
    ``derivative`` > 0 it returns the corresponding derivative features
    instead. Stateless apart from parameter validation, so it composes with
    pipelines that expect fit/transform.
    """

    def __init__(self, degree: int = 6, mode: str = "shifted", derivative: int = 0):
        self.degree = degree
        self.mode = mode
        self.derivative = derivative

    def fit(self, X, y=None):
        _check_degree(self.degree)
        _check_mode(self.mode)
        if not isinstance(self.derivative, (int, np.integer)) or self.derivative < 0:
            raise ValidationError(
                f"derivative must be a non-negative integer, got {self.derivative!r}"
            )
        self.n_features_in_ = 1
        return self

    def transform(self, X) -> np.ndarray:
        self.fit(X)
        a = as_float_1d(X, "basis arguments")
        if self.derivative == 0:
            return legendre_design(a, self.degree, self.mode)
        return legendre_derivative_design(a, self.degree, int(self.derivative), self.mode)
