import math

import numpy as np
import pytest
from helpers import regularized_lower_gamma
from scipy.integrate import quad
from scipy.special import gammaln

from trimratio import (
    GammaNormalDgp,
    NumericalError,
    ValidationError,
    dgp_truth,
    exact_trim_bias,
    gamma_design,
    named_design,
    uniform_design,
    var_trimmed_rate,
)

SMALL_H_GRID = (1e-4, 3e-4, 1e-3)


class TestExactTrimBias:
    def test_uniform_linear_identity(self):
        design = named_design("uniform-linear")
        for h in (0.05, 0.1, 0.2, 0.4):
            dec = exact_trim_bias(design, h, 2)
            assert dec.total == pytest.approx(h, abs=1e-10)
            assert abs(dec.remainder) <= 1e-10
            assert dec.identity_gap <= 1e-8

    def test_uniform_quadratic(self):
        dec = exact_trim_bias(named_design("uniform-quadratic"), 0.4, 3)
        np.testing.assert_allclose(dec.main_terms, [0.0, 0.08], atol=1e-10)
        assert abs(dec.remainder) <= 1e-10
        assert dec.total == pytest.approx(0.08, abs=1e-10)

    def test_gamma_total_matches_incomplete_gamma_series(self):
        design = named_design("gamma-linear")
        dec = exact_trim_bias(design, 0.1, 2)
        assert dec.total == pytest.approx(
            regularized_lower_gamma(1.5, 0.1), abs=1e-8
        )
        assert design.tail_mass_above_one == pytest.approx(
            1.0 - regularized_lower_gamma(1.5, 1.0), abs=1e-8
        )

    def test_small_shape_substitution_path(self):
        # alpha < 1 exercises the endpoint-singularity substitution
        design = gamma_design(0.6, 1.0, 2.0)
        dec = exact_trim_bias(design, 0.2, 2)
        assert dec.total == pytest.approx(
            2.0 * regularized_lower_gamma(0.6, 0.2), abs=1e-8
        )
        assert dec.identity_gap <= 1e-8

    def test_remainder_vanishes_for_low_degree_polynomials(self):
        dec = exact_trim_bias(named_design("uniform-cubic"), 0.3, 4)
        assert abs(dec.remainder) <= 1e-10

    def test_smooth_design_identity_and_remainder_bound(self):
        design = named_design("uniform-expm1")
        for h in (0.05, 0.1, 0.2, 0.4):
            dec = exact_trim_bias(design, h, 3)
            assert dec.identity_gap <= 1e-8
            # |remainder| <= sup |m'''| on [0, h] * E[A^2 1{A<h}] / 2!
            bound = math.exp(h) * (h**3 / 3.0) / 2.0
            assert abs(dec.remainder) <= bound + 1e-12

    def test_identity_across_smoothness_orders(self):
        design = named_design("uniform-expm1")
        for k in (2, 3, 4, 5):
            dec = exact_trim_bias(design, 0.25, k)
            assert dec.identity_gap <= 1e-8
            assert dec.total == pytest.approx(
                float(np.sum(dec.main_terms)) + dec.remainder, abs=1e-8
            )

    def test_invalid_inputs(self):
        design = named_design("uniform-linear")
        with pytest.raises(ValidationError):
            exact_trim_bias(design, 0.0, 2)
        with pytest.raises(ValidationError):
            exact_trim_bias(design, 1.0, 2)
        with pytest.raises(ValidationError):
            exact_trim_bias(design, 0.2, 1)

    def test_design_validation(self):
        bad_mean = uniform_design(lambda a: a + 1.0, (lambda a: 1.0,) * 3, "bad")
        with pytest.raises(ValidationError):
            exact_trim_bias(bad_mean, 0.2, 2)
        bad_deriv = uniform_design(lambda a: a, (lambda a: 2.0,) * 3, "bad")
        with pytest.raises(ValidationError):
            exact_trim_bias(bad_deriv, 0.2, 2)
        with pytest.raises(ValidationError):
            named_design("uniform-sine")


class TestDgpTruth:
    def test_heavy_tail_example(self):
        truth = dgp_truth(GammaNormalDgp(alpha=1.5, beta=1.0, c1=1.0, c2=1.0, d=0.0))
        assert truth.theta == 1.0
        assert truth.moment_exists is True
        assert truth.variance_exists is False

    def test_zero_and_scaled_means(self):
        assert dgp_truth(GammaNormalDgp(alpha=3.0, c1=0.0)).theta == 0.0
        assert dgp_truth(GammaNormalDgp(alpha=1.5, c1=2.5)).theta == 2.5

    def test_flag_boundaries(self):
        assert dgp_truth(GammaNormalDgp(alpha=2.5, d=0.0)).variance_exists is True
        assert dgp_truth(GammaNormalDgp(alpha=2.0, d=0.0)).variance_exists is None
        assert dgp_truth(GammaNormalDgp(alpha=0.7, d=0.5)).moment_exists is False
        noiseless = dgp_truth(GammaNormalDgp(alpha=1.5, noiseless=True))
        assert noiseless.variance_exists is True and noiseless.moment_exists is True

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            dgp_truth(GammaNormalDgp(alpha=-1.0))
        with pytest.raises(ValidationError):
            dgp_truth(GammaNormalDgp(alpha=1.5, c2=0.0))
        with pytest.raises(ValidationError):
            dgp_truth(GammaNormalDgp(alpha=1.5, c1=-0.5))

    def test_theta_matches_full_support_quadrature(self):
        # E[B/A] = integral of (m(a)/a) f(a) da when the moment exists
        for dgp in (
            GammaNormalDgp(alpha=1.5, beta=1.0, c1=2.5),
            GammaNormalDgp(alpha=3.0, beta=0.7, c1=1.0),
        ):
            def integrand(a, c1=dgp.c1, alpha=dgp.alpha, beta=dgp.beta):
                log_pdf = (
                    (alpha - 1.0) * math.log(a)
                    - a / beta
                    - gammaln(alpha)
                    - alpha * math.log(beta)
                )
                return c1 * math.exp(log_pdf)

            value = quad(integrand, 0.0, np.inf, epsabs=1e-10, limit=500)[0]
            assert dgp_truth(dgp).theta == pytest.approx(value, abs=1e-6)


class TestVarTrimmedRate:
    @pytest.mark.parametrize(
        "alpha,d,target",
        [(1.5, 0.0, -0.5), (1.0, 0.5, -0.5), (2.5, 0.0, 0.0)],
    )
    def test_slope_targets_in_small_h_regime(self, alpha, d, target):
        dgp = GammaNormalDgp(alpha=alpha, beta=1.0, c1=1.0, c2=1.0, d=d)
        slope = var_trimmed_rate(dgp, SMALL_H_GRID)
        assert slope == pytest.approx(target, abs=0.1)

    def test_matches_independent_quadrature(self):
        # same quantity computed directly in the test, including at the
        # moderate thresholds where the asymptotic exponent has not set in
        dgp = GammaNormalDgp(alpha=1.5, beta=1.0, c1=1.0, c2=1.0, d=0.0)
        grid = np.array([0.02, 0.05, 0.1])

        def pdf(a):
            return math.exp(0.5 * math.log(a) - a - gammaln(1.5))

        variances = []
        for h in grid:
            mean = quad(pdf, h, np.inf, epsabs=1e-12, limit=500)[0]
            second = quad(
                lambda a: (1.0 + a**-2.0) * pdf(a), h, np.inf, epsabs=1e-12, limit=500
            )[0]
            variances.append(second - mean**2)
        expected = np.polyfit(np.log(grid), np.log(variances), 1)[0]
        assert var_trimmed_rate(dgp, grid) == pytest.approx(expected, abs=1e-6)
        # at this grid the finite-threshold slope is visibly steeper than the
        # asymptotic exponent -(2 - alpha - d) = -0.5
        assert expected == pytest.approx(-0.7167, abs=5e-3)

    def test_grid_validation(self):
        dgp = GammaNormalDgp(alpha=1.5)
        with pytest.raises(ValidationError):
            var_trimmed_rate(dgp, [0.1, 0.2])
        with pytest.raises(ValidationError):
            var_trimmed_rate(dgp, [0.0, 0.1, 0.2])
        with pytest.raises(ValidationError):
            var_trimmed_rate(dgp, [0.1, 0.2, 0.6])


def test_design_derivative_lookup_errors():
    design = named_design("uniform-linear")
    with pytest.raises(ValidationError):
        design.derivative(0)
    with pytest.raises(ValidationError):
        design.derivative(99)


def test_bias_identity_gate_raises_on_impossible_tolerance():
    design = named_design("uniform-expm1")
    with pytest.raises(NumericalError):
        exact_trim_bias(design, 0.3, 3, identity_tol=1e-30)


def test_quadrature_failure_reports_achieved_tolerance():
    from trimratio.errors import QuadratureError
    from trimratio.oracle import _quad

    with pytest.raises(QuadratureError) as err:
        _quad(lambda x: math.sin(1.0 / x) / x, 1e-12, 1.0)
    assert "absolute error" in str(err.value)
