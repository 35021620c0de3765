import numpy as np
import pytest

from trimratio import (
    GammaNormalDgp,
    TrimmedRatioEstimator,
    ValidationError,
    dgp_truth,
    ks_distance_to_standard_normal,
    replication_rng,
    run_replications,
    sample_dgp,
    t_stat_normality,
)
from trimratio.dgp import draw_sample

HEAVY = GammaNormalDgp(alpha=1.5, beta=1.0, c1=1.0, c2=1.0, d=0.0)


class TestSampling:
    def test_seed_determinism(self):
        a1, b1 = sample_dgp(HEAVY, 5, seed=42)
        a2, b2 = sample_dgp(HEAVY, 5, seed=42)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(b1, b2)
        a3, _ = sample_dgp(HEAVY, 5, seed=43)
        assert not np.array_equal(a1, a3)

    def test_noiseless_switch_is_exact(self):
        dgp = GammaNormalDgp(alpha=1.5, c1=1.0, noiseless=True)
        a, b = sample_dgp(dgp, 100, seed=1)
        np.testing.assert_array_equal(b, 1.0 * a)

    def test_sampler_refuses_nonexistent_moment(self):
        with pytest.raises(ValidationError):
            sample_dgp(GammaNormalDgp(alpha=0.5, d=0.0), 10, seed=1)

    def test_seed_validation(self):
        with pytest.raises(ValidationError):
            sample_dgp(HEAVY, 10, seed=-1)
        with pytest.raises(ValidationError):
            sample_dgp(HEAVY, 10, seed=2**64)
        with pytest.raises(ValidationError):
            sample_dgp(HEAVY, 0, seed=1)

    def test_gamma_mean_against_clt_bound(self):
        n = 1_000_000
        a, _ = sample_dgp(GammaNormalDgp(alpha=1.5, beta=2.0, noiseless=True), n, seed=9)
        # mean alpha*beta, variance alpha*beta^2
        se = np.sqrt(1.5 * 4.0 / n)
        assert abs(a.mean() - 3.0) <= 3.0 * se

    def test_positivity_even_for_tiny_shape(self):
        dgp = GammaNormalDgp(alpha=0.9, beta=1.0, d=0.5)
        a, _ = sample_dgp(dgp, 200_000, seed=5)
        assert np.all(a > 0)


class TestKsDistance:
    def test_placebo_normal_stream(self):
        draws = np.random.default_rng(123).standard_normal(1000)
        assert ks_distance_to_standard_normal(draws) < 0.06

    def test_constant_values(self):
        assert ks_distance_to_standard_normal(np.zeros(100)) >= 0.5
        assert ks_distance_to_standard_normal(np.full(100, 3.0)) >= 0.5

    def test_agrees_with_direct_definition(self):
        from scipy.stats import norm

        x = np.sort(np.random.default_rng(7).standard_normal(257))
        n = x.size
        cdf = norm.cdf(x)
        direct = max(
            max(abs((i + 1) / n - cdf[i]) for i in range(n)),
            max(abs(i / n - cdf[i]) for i in range(n)),
        )
        assert ks_distance_to_standard_normal(x) == pytest.approx(direct, abs=1e-14)


class TestRunReplications:
    def test_noiseless_corrected_bias_is_machine_zero(self):
        dgp = GammaNormalDgp(alpha=1.5, c1=1.0, noiseless=True)
        est = TrimmedRatioEstimator(smoothness=2, degree=2, threshold=0.2)
        report = run_replications(dgp, 100, 50, seed=11, estimator=est)
        assert report.successes == 50
        corrected = report.estimates["corrected"]
        assert np.max(np.abs(corrected - 1.0)) <= 1e-9

    def test_determinism_across_worker_counts(self):
        est = TrimmedRatioEstimator(smoothness=4, degree=6, threshold=0.25)
        reports = [
            run_replications(HEAVY, 150, 24, seed=99, estimator=est, workers=w)
            for w in (1, 2, 8)
        ]
        for other in reports[1:]:
            assert reports[0].summaries == other.summaries
            for name in ("naive", "trimmed", "corrected"):
                np.testing.assert_array_equal(
                    reports[0].estimates[name], other.estimates[name]
                )
            np.testing.assert_array_equal(reports[0].t_stats, other.t_stats)

    def test_replication_streams_depend_only_on_seed_and_index(self):
        est = TrimmedRatioEstimator(smoothness=4, degree=6, threshold=0.25)
        long = run_replications(HEAVY, 150, 8, seed=7, estimator=est)
        short = run_replications(HEAVY, 150, 3, seed=7, estimator=est)
        np.testing.assert_array_equal(
            long.estimates["corrected"][:3], short.estimates["corrected"]
        )
        # replication 2 reproduced in isolation from its stream
        a, b = draw_sample(HEAVY, 150, replication_rng(7, 2))
        model = TrimmedRatioEstimator(smoothness=4, degree=6, threshold=0.25).fit(a, b)
        assert model.theta_ == long.estimates["corrected"][2]

    def test_failures_counted_not_dropped(self):
        # h = 0 with a noiseless model makes the centered statistic constant,
        # so every replication hits the variance floor
        dgp = GammaNormalDgp(alpha=1.5, c1=1.0, noiseless=True)
        est = TrimmedRatioEstimator(smoothness=2, degree=2, threshold=0.0)
        report = run_replications(dgp, 50, 6, seed=3, estimator=est)
        assert report.successes == 0
        assert report.failures["variance_floor"] == 6
        assert report.reps == report.successes + sum(report.failures.values())
        assert np.all(np.isnan(report.estimates["corrected"]))
        assert np.all(np.isfinite(report.estimates["naive"]))

    def test_coverage_monotone_in_confidence_level(self):
        reports = {}
        for level in (0.90, 0.99):
            est = TrimmedRatioEstimator(
                smoothness=4, degree=6, threshold=0.2, confidence_level=level
            )
            reports[level] = run_replications(HEAVY, 300, 120, seed=17, estimator=est)
        for name in ("naive", "trimmed", "corrected"):
            assert (
                reports[0.99].summaries[name].coverage
                >= reports[0.90].summaries[name].coverage
            )

    def test_naive_instability_witness(self):
        # infinite ratio variance (alpha + d < 2): the naive mean is far more
        # dispersed across replications than the trimmed mean
        est = TrimmedRatioEstimator(smoothness=4, degree=6)
        report = run_replications(HEAVY, 2000, 200, seed=23, estimator=est)
        assert report.summaries["naive"].sd >= 2.0 * report.summaries["trimmed"].sd

    def test_truth_and_config_recorded(self):
        est = TrimmedRatioEstimator(smoothness=4, degree=6, threshold=0.3)
        report = run_replications(HEAVY, 120, 5, seed=2, estimator=est)
        assert report.theta_true == dgp_truth(HEAVY).theta
        assert report.estimator_params["degree"] == 6
        assert report.mean_h == pytest.approx(0.3)

    def test_normality_check_requires_enough_reps(self):
        est = TrimmedRatioEstimator(smoothness=4, degree=6, threshold=0.2)
        report = run_replications(HEAVY, 150, 10, seed=5, estimator=est)
        with pytest.raises(ValidationError):
            t_stat_normality(report)

    def test_argument_validation(self):
        with pytest.raises(ValidationError):
            run_replications(HEAVY, 100, 0, seed=1)
        with pytest.raises(ValidationError):
            run_replications(HEAVY, 100, 5, seed=1, workers=0)
        with pytest.raises(ValidationError):
            run_replications(GammaNormalDgp(alpha=0.5), 100, 5, seed=1)
