import math

import numpy as np
import pytest
from scipy import stats

from abc_evidence.core import Dataset, DegenerateSample, InvalidConfig, UnseenObservation, make_stream
from abc_evidence.density import empirical_pmf, kde_log_ordinate, silverman_bandwidth, simulated_log_likelihood
from abc_evidence.models import GEOMETRIC_UNIFORM, POISSON_EXP

GAMMA = stats.gamma(a=19, scale=1 / 11)
THETA_HAT = 19 / 11


class TestKde:
    def test_gamma_ordinate(self):
        draws = GAMMA.rvs(size=100_000, random_state=np.random.default_rng(1))
        est = kde_log_ordinate(draws, THETA_HAT)
        assert abs(est.log_density - GAMMA.logpdf(THETA_HAT)) <= 0.02
        assert est.sample_size == 100_000 and est.bandwidth > 0

    def test_uniform_ordinate(self):
        draws = np.random.default_rng(2).uniform(size=100_000)
        assert abs(kde_log_ordinate(draws, 0.5).log_density) <= 0.02

    def test_degenerate(self):
        with pytest.raises(DegenerateSample):
            kde_log_ordinate(np.ones(100), 1.0)
        with pytest.raises(DegenerateSample):
            kde_log_ordinate([1.0], 1.0)

    def test_nonfinite_point(self):
        with pytest.raises(InvalidConfig):
            kde_log_ordinate([0.0, 1.0], float("nan"))

    def test_bandwidth_rule(self):
        x = np.random.default_rng(3).normal(size=1000)
        sd = x.std(ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        assert silverman_bandwidth(x) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 1000 ** -0.2)

    def test_matches_direct_sum(self):
        # plain (non log-space) Gaussian kernel sum on a small sample
        x = np.random.default_rng(4).gamma(3.0, size=50)
        est = kde_log_ordinate(x, 2.5)
        h = est.bandwidth
        direct = np.mean(np.exp(-0.5 * ((x - 2.5) / h) ** 2) / (h * math.sqrt(2 * math.pi)))
        assert est.log_density == pytest.approx(math.log(direct), abs=1e-12)

    def test_error_shrinks_with_draws(self):
        truth = GAMMA.logpdf(THETA_HAT)
        medians = []
        for size in (1_000, 10_000, 100_000):
            errs = [
                abs(kde_log_ordinate(GAMMA.rvs(size=size, random_state=np.random.default_rng(s)), THETA_HAT).log_density - truth)
                for s in range(20)
            ]
            medians.append(np.median(errs))
        assert medians[0] > medians[1] > medians[2]


class TestSimulatedLikelihood:
    def test_paper_dataset(self, paper):
        est = simulated_log_likelihood(POISSON_EXP, THETA_HAT, paper, 10**6, 0.0, make_stream(0, "lik"))
        exact = POISSON_EXP.exact_log_likelihood(THETA_HAT, paper)
        # estimator sd here is about 0.011, so a single draw gets a 3-sd band
        assert abs(est.log_likelihood - exact) <= 0.035
        assert set(est.per_value_counts) == {1, 2, 3}
        assert all(c <= est.m_sims for c in est.per_value_counts.values())

    def test_median_error_at_full_budget(self, paper):
        exact = POISSON_EXP.exact_log_likelihood(THETA_HAT, paper)
        errs = [
            abs(simulated_log_likelihood(POISSON_EXP, THETA_HAT, paper, 10**6, 0.0, make_stream(s, "lik")).log_likelihood - exact)
            for s in range(20)
        ]
        assert np.median(errs) <= 0.01

    def test_geometric_zero(self):
        est = simulated_log_likelihood(GEOMETRIC_UNIFORM, 0.5, Dataset([0]), 10**6, 0.0, make_stream(0, "lik"))
        assert abs(est.log_likelihood - math.log(0.5)) <= 0.01

    def test_unseen(self):
        with pytest.raises(UnseenObservation):
            simulated_log_likelihood(POISSON_EXP, 0.1, Dataset([0, 50]), 10**4, 0.0, make_stream(0, "lik"))

    def test_smoothing_makes_unseen_finite(self):
        est = simulated_log_likelihood(POISSON_EXP, 0.1, Dataset([0, 50]), 10**4, 0.5, make_stream(0, "lik"))
        assert math.isfinite(est.log_likelihood)
        assert est.per_value_counts[50] == 0

    def test_budget_floor(self, paper):
        with pytest.raises(InvalidConfig):
            simulated_log_likelihood(POISSON_EXP, 1.0, paper, 9_999, 0.0, make_stream(0, "lik"))

    def test_support(self, paper):
        with pytest.raises(InvalidConfig):
            simulated_log_likelihood(GEOMETRIC_UNIFORM, 1.5, paper, 10**4, 0.0, make_stream(0, "lik"))

    def test_plain_product_of_frequencies(self, paper):
        # with alpha = 0 the estimate is the product of empirical frequencies
        m = 20_000
        est = simulated_log_likelihood(POISSON_EXP, 2.0, paper, m, 0.0, make_stream(8, "lik"))
        expected = sum(math.log(est.per_value_counts[y] / m) for y in paper.counts)
        assert est.log_likelihood == pytest.approx(expected, abs=1e-12)

    def test_error_shrinks_with_m(self, paper):
        exact = POISSON_EXP.exact_log_likelihood(THETA_HAT, paper)
        medians = []
        for m in (10**4, 10**5, 10**6):
            errs = [
                abs(simulated_log_likelihood(POISSON_EXP, THETA_HAT, paper, m, 0.0, make_stream(s, f"lik-{m}")).log_likelihood - exact)
                for s in range(20)
            ]
            medians.append(np.median(errs))
        assert medians[0] > medians[1] > medians[2]


class TestEmpiricalPmf:
    def test_sums_to_one_unsmoothed(self):
        sims = np.random.default_rng(0).poisson(3.0, size=12_345)
        assert empirical_pmf(sims, 0.0, int(sims.max())).sum() == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("alpha", [0.1, 1.0, 7.5])
    def test_sums_to_one_smoothed(self, alpha):
        sims = np.random.default_rng(1).geometric(0.3, size=5000) - 1
        pmf = empirical_pmf(sims, alpha, int(sims.max()) + 5)
        assert abs(pmf.sum() - 1.0) <= 1e-12
        assert np.all(pmf > 0)
