"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the library's own code paths: the basis
is rebuilt from numpy's polynomial module, linear systems are solved by a
hand-rolled Gaussian elimination, and the regularized lower incomplete gamma
comes from its power series.
"""

from __future__ import annotations

import math

import numpy as np


def gaussian_solve(matrix, rhs):
    """Solve a small dense linear system by Gaussian elimination with
    partial pivoting."""
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float)
    n = a.shape[0]
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[pivot, col]) < 1e-300:
            raise ZeroDivisionError("singular system")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            factor = a[row, col] / a[col, col]
            a[row, col:] -= factor * a[col, col:]
            b[row] -= factor * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


def reference_design(a, degree, mode="shifted", order=0):
    """Basis (or basis-derivative) matrix built from numpy's Legendre module."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    x = 2.0 * a - 1.0 if mode == "shifted" else a
    cols = []
    for n in range(degree + 1):
        coeffs = np.zeros(n + 1)
        coeffs[n] = 1.0
        if order:
            coeffs = np.polynomial.legendre.legder(coeffs, order)
        vals = np.polynomial.legendre.legval(x, coeffs)
        scale = math.sqrt(2 * n + 1)
        if mode == "shifted":
            scale *= 2.0**order
        cols.append(scale * vals)
    return np.column_stack(cols)


def regularized_lower_gamma(shape, x, tol=1e-14, max_terms=500):
    """Power series for P(shape, x) = gamma(shape, x) / Gamma(shape)."""
    if x < 0 or shape <= 0:
        raise ValueError("need x >= 0 and shape > 0")
    if x == 0:
        return 0.0
    term = 1.0 / shape
    total = term
    denom = shape
    for _ in range(max_terms):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < tol * abs(total):
            break
    return math.exp(shape * math.log(x) - x - math.lgamma(shape)) * total


def explicit_normalized_legendre(a):
    """First six orthonormal elements written out as plain polynomials."""
    a = np.asarray(a, dtype=float)
    return np.column_stack(
        [
            np.ones_like(a),
            math.sqrt(3) * a,
            math.sqrt(5) * (3 * a**2 - 1) / 2,
            math.sqrt(7) * (5 * a**3 - 3 * a) / 2,
            3 * (35 * a**4 - 30 * a**2 + 3) / 8,
            math.sqrt(11) * (63 * a**5 - 70 * a**3 + 15 * a) / 8,
        ]
    )
