"""Copula CDFs and samplers.

The decisive check is sampler/CDF consistency: the empirical joint CDF of
the frailty sampler must match the closed-form copula at random points.
Kendall's tau has closed forms in theta for both families and doubles as a
calibration oracle.
"""

import numpy as np
import pytest
from scipy import stats

from countcombine import CopulaFamily, CopulaSpec, copula_cdf, copula_sample

N_DRAWS = 10**5


def _tau(u):
    return stats.kendalltau(u[:, 0], u[:, 1]).statistic


class TestCopulaSpec:
    def test_clayton_domain(self):
        CopulaSpec("clayton", theta=0.5, dim=2)
        with pytest.raises(ValueError):
            CopulaSpec("clayton", theta=0.0, dim=2)
        with pytest.raises(ValueError):
            CopulaSpec("clayton", theta=-1.0, dim=2)

    def test_gumbel_domain(self):
        CopulaSpec("gumbel-hougaard", theta=1.0, dim=2)
        with pytest.raises(ValueError):
            CopulaSpec("gumbel-hougaard", theta=0.9, dim=2)

    def test_independence_ignores_theta(self):
        CopulaSpec("independence", theta=-7.0, dim=3)

    def test_dimension(self):
        with pytest.raises(ValueError):
            CopulaSpec("independence", dim=1)


class TestCopulaCdf:
    def test_clayton_worked_value(self):
        spec = CopulaSpec("clayton", theta=1.0, dim=2)
        assert copula_cdf(spec, [0.5, 0.5]) == pytest.approx(1.0 / 3.0, rel=1e-12)

    def test_gumbel_theta_one_is_product(self):
        spec = CopulaSpec("gumbel-hougaard", theta=1.0, dim=2)
        assert copula_cdf(spec, [0.5, 0.5]) == pytest.approx(0.25, rel=1e-12)

    def test_grounded_at_corners(self):
        for family, theta in [("independence", 0.0), ("clayton", 2.0), ("gumbel-hougaard", 2.0)]:
            spec = CopulaSpec(family, theta=theta, dim=3)
            assert copula_cdf(spec, [1.0, 1.0, 1.0]) == pytest.approx(1.0, rel=1e-12)
            assert copula_cdf(spec, [0.0, 0.4, 0.9]) == 0.0

    def test_below_min_component(self):
        rng = np.random.default_rng(5)
        for family, theta in [("clayton", 3.0), ("gumbel-hougaard", 2.0)]:
            spec = CopulaSpec(family, theta=theta, dim=4)
            for _ in range(50):
                u = rng.uniform(0.05, 1.0, size=4)
                assert 0.0 <= copula_cdf(spec, u) <= u.min() + 1e-15

    def test_dimension_mismatch(self):
        spec = CopulaSpec("clayton", theta=1.0, dim=3)
        with pytest.raises(ValueError):
            copula_cdf(spec, [0.5, 0.5])


class TestSampling:
    def test_single_draw_shape_and_range(self):
        rng = np.random.default_rng(0)
        for family, theta in [("independence", 0.0), ("clayton", 2.0), ("gumbel-hougaard", 2.0)]:
            spec = CopulaSpec(family, theta=theta, dim=5)
            u = copula_sample(spec, rng)
            assert u.shape == (5,)
            assert np.all((u > 0.0) & (u < 1.0))
            batch = copula_sample(spec, rng, size=7)
            assert batch.shape == (7, 5)

    def test_deterministic_given_seed(self):
        spec = CopulaSpec("clayton", theta=3.0, dim=2)
        a = copula_sample(spec, np.random.default_rng(11), size=10)
        b = copula_sample(spec, np.random.default_rng(11), size=10)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize(
        "family,theta",
        [("clayton", 1.0), ("clayton", 3.0), ("clayton", 5.0),
         ("gumbel-hougaard", 1.0), ("gumbel-hougaard", 2.0),
         ("gumbel-hougaard", 3.0), ("gumbel-hougaard", 5.0)],
    )
    def test_marginal_uniformity(self, family, theta):
        spec = CopulaSpec(family, theta=theta, dim=2)
        u = copula_sample(spec, np.random.default_rng(20260810), size=N_DRAWS)
        for j in range(2):
            ks = stats.kstest(u[:, j], "uniform").statistic
            assert ks < 0.01, f"{family} theta={theta} col {j}: KS={ks:.4f}"

    @pytest.mark.parametrize(
        "family,theta",
        [("clayton", 3.0), ("gumbel-hougaard", 2.0)],
    )
    def test_sampler_matches_cdf(self, family, theta):
        spec = CopulaSpec(family, theta=theta, dim=2)
        u = copula_sample(spec, np.random.default_rng(20260811), size=N_DRAWS)
        points = np.random.default_rng(20260812).uniform(0.05, 0.95, size=(20, 2))
        for point in points:
            target = copula_cdf(spec, point)
            empirical = np.mean(np.all(u <= point, axis=1))
            se = np.sqrt(target * (1.0 - target) / N_DRAWS)
            assert abs(empirical - target) < 3.0 * se, (
                f"{family} theta={theta} at {point}: emp={empirical:.5f} cdf={target:.5f}"
            )

    @pytest.mark.parametrize("theta", [1.0, 3.0, 5.0])
    def test_clayton_kendall_tau(self, theta):
        spec = CopulaSpec("clayton", theta=theta, dim=2)
        u = copula_sample(spec, np.random.default_rng(20260813), size=N_DRAWS)
        assert abs(_tau(u) - theta / (theta + 2.0)) < 0.01

    @pytest.mark.parametrize("theta", [1.0, 2.0, 3.0, 5.0])
    def test_gumbel_kendall_tau(self, theta):
        spec = CopulaSpec("gumbel-hougaard", theta=theta, dim=2)
        u = copula_sample(spec, np.random.default_rng(20260814), size=N_DRAWS)
        assert abs(_tau(u) - (1.0 - 1.0 / theta)) < 0.01

    def test_gumbel_theta_one_independent(self):
        spec = CopulaSpec("gumbel-hougaard", theta=1.0, dim=3)
        u = copula_sample(spec, np.random.default_rng(20260815), size=N_DRAWS)
        for a, b in [(0, 1), (0, 2), (1, 2)]:
            assert abs(stats.kendalltau(u[:, a], u[:, b]).statistic) < 0.01

    def test_exchangeability(self):
        spec = CopulaSpec("clayton", theta=3.0, dim=3)
        u = copula_sample(spec, np.random.default_rng(20260816), size=N_DRAWS)
        taus = [stats.kendalltau(u[:, a], u[:, b]).statistic for a, b in [(0, 1), (0, 2), (1, 2)]]
        # tau estimates share an SE of ~0.0021 at this sample size
        se_diff = np.sqrt(2.0) * 0.0021
        assert max(taus) - min(taus) < 3.0 * se_diff
