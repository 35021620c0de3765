"""Series regression of the numerator on a Legendre basis of the denominator.

The fitted object exposes the regression coefficients, the empirical Gram
matrix with its condition number, the residuals, and the derivative
estimates of the conditional mean at zero that drive the trimming-bias
correction. Influence values for those derivative estimates are available in
two forms, see ``influence_matrix``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .basis import MAX_DEGREE, _check_mode, legendre_derivative_design, legendre_design
from .errors import DegenerateDesignError, ValidationError
from .validation import check_ab, readonly

CONDITION_LIMIT = 1e12
CONDITION_WARNING = 1e8

INFLUENCE_MODES = ("sandwich", "literal")


def _check_orders(degree, smoothness) -> tuple[int, int]:
    if not isinstance(smoothness, (int, np.integer)) or smoothness < 2:
        raise ValidationError(
            f"smoothness must be an integer >= 2 (the correction sum is empty "
            f"otherwise), got {smoothness!r}"
        )
    if not isinstance(degree, (int, np.integer)) or degree < smoothness:
        raise ValidationError(
            f"degree must be an integer >= smoothness, got degree={degree!r} "
            f"with smoothness={smoothness!r}"
        )
    if degree > MAX_DEGREE:
        raise ValidationError(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    return int(degree), int(smoothness)


def _check_influence_mode(mode) -> str:
    if mode not in INFLUENCE_MODES:
        raise ValidationError(
            f"influence mode must be one of {INFLUENCE_MODES}, got {mode!r}"
        )
    return mode


class SieveRegression(RegressorMixin, BaseEstimator):
    """Least squares fit of numerators on the Legendre basis of denominators.

    Parameters
    ----------
    degree : int
        Highest basis degree (design has degree+1 columns).
    smoothness : int
        Assumed differentiability order of the conditional mean; derivative
        estimates at zero are produced for orders 1 .. smoothness-1.
    basis : {"shifted", "literal"}
        Basis domain convention.
    influence : {"sandwich", "literal"}
        Default form used by ``influence_matrix``.

    The normal equations are solved with a Cholesky factorization of the
    empirical Gram matrix. Designs whose Gram condition number exceeds
    ``CONDITION_LIMIT`` raise :class:`DegenerateDesignError`: the
    bounded-eigenvalue requirement on E[p(A)p(A)'] is violated numerically.
    """

    def __init__(
        self,
        degree: int = 6,
        smoothness: int = 4,
        basis: str = "shifted",
        influence: str = "sandwich",
    ):
        self.degree = degree
        self.smoothness = smoothness
        self.basis = basis
        self.influence = influence

    def fit(self, X, y):
        degree, smoothness = _check_orders(self.degree, self.smoothness)
        _check_mode(self.basis)
        _check_influence_mode(self.influence)
        a, b = check_ab(X, y, unit_interval=True, min_n=degree + 2)
        n = a.size

        design = legendre_design(a, degree, self.basis)
        gram = design.T @ design / n
        condition = float(np.linalg.cond(gram))
        if not np.isfinite(condition) or condition > CONDITION_LIMIT:
            raise DegenerateDesignError(
                f"Gram matrix condition number {condition:.3e} exceeds "
                f"{CONDITION_LIMIT:.0e}; the empirical second-moment matrix of the "
                "basis must have eigenvalues bounded above and away from zero"
            )
        try:
            factor = cho_factor(gram, lower=True)
        except LinAlgError as exc:
            raise DegenerateDesignError(
                f"Gram matrix is not positive definite: {exc}"
            ) from exc

        beta = cho_solve(factor, design.T @ b / n)
        deriv_rows = np.vstack(
            [
                legendre_derivative_design(0.0, degree, order, self.basis)
                for order in range(1, smoothness)
            ]
        )

        self.coef_ = readonly(beta)
        self.gram_ = readonly(gram)
        self.gram_condition_ = condition
        self.residuals_ = readonly(b - design @ beta)
        self.derivatives_at_zero_ = readonly(deriv_rows @ beta)
        self.n_samples_ = n
        self._a = readonly(a)
        self._design = readonly(design)
        self._factor = factor
        self._deriv_rows = readonly(deriv_rows)
        return self

    def _require_fitted(self):
        if not hasattr(self, "coef_"):
            raise NotFittedError("this SieveRegression instance is not fitted yet")

    def predict(self, X) -> np.ndarray:
        """Fitted conditional-mean values at the given denominators."""
        self._require_fitted()
        a = np.asarray(X, dtype=float)
        return legendre_design(a, int(self.degree), self.basis) @ self.coef_

    def derivative_at_zero(self, order: int) -> float:
        """Estimated derivative of the conditional mean at zero."""
        self._require_fitted()
        if not isinstance(order, (int, np.integer)) or not 1 <= order <= self.smoothness - 1:
            raise ValidationError(
                f"derivative order must lie in 1 .. {self.smoothness - 1}, got {order!r}"
            )
        return float(self.derivatives_at_zero_[order - 1])

    def influence_matrix(self, mode: str | None = None) -> np.ndarray:
        """Per-observation influence values of the derivative estimates.

        Returns an (n, smoothness-1) matrix whose (i, order-1) entry is the
        influence of observation i on the order-th derivative estimate.

        Two forms are implemented. "sandwich" (the default) evaluates the
        derivative basis at zero and restores the inverse Gram weighting,
        d(0)' G^{-1} p(A_i) * residual_i, whose columns average to zero over
        the sample by the normal equations. "literal" evaluates
        d(A_i)' p(A_i) * residual_i with the derivative basis at A_i and no
        Gram inverse; it lacks the mean-zero property in general and is kept
        for exact reproduction of that convention.
        """
        self._require_fitted()
        mode = _check_influence_mode(self.influence if mode is None else mode)
        resid = self.residuals_
        if mode == "sandwich":
            weights = cho_solve(self._factor, self._deriv_rows.T)
            return (self._design @ weights) * resid[:, None]
        orders = range(1, int(self.smoothness))
        cols = []
        for order in orders:
            deriv = legendre_derivative_design(self._a, int(self.degree), order, self.basis)
            cols.append(np.einsum("ij,ij->i", deriv, self._design) * resid)
        return np.column_stack(cols)
