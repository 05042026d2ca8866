"""Residual families: densities, samplers, and exact moments.

Monte Carlo oracles use pinned seeds; analytic moments are also checked
against scipy's t distribution where it applies.
"""

import itertools
import math

import numpy as np
import pytest
import scipy.stats

from varprod.distributions import (
    Family,
    ResidualSpec,
    cdf_t,
    marginal_pdf_t,
    moments,
    pdf,
    sample,
    sample_pair,
    second_moments,
)
from varprod.errors import DomainError, HeavyTailError, InvalidSpecError
from varprod.numerics import RandomStream

SIGMA = math.sqrt(5.0 / 3.0)


class TestSpecValidation:
    def test_rho_out_of_range(self):
        with pytest.raises(InvalidSpecError):
            ResidualSpec.gaussian(1.0, 1.0, rho=1.0)

    def test_nonpositive_sigma(self):
        with pytest.raises(InvalidSpecError):
            ResidualSpec.gaussian(0.0, 1.0)

    def test_bivariate_t_needs_eta(self):
        with pytest.raises(InvalidSpecError):
            ResidualSpec(Family.BIVARIATE_T, rho=0.2)

    def test_independent_components_flag(self):
        assert ResidualSpec.gaussian(1, 1, 0.0).independent_components
        assert not ResidualSpec.gaussian(1, 1, 0.3).independent_components
        assert ResidualSpec.independent_t(5, 5).independent_components
        # zero correlation does not decouple the bivariate t
        assert not ResidualSpec.bivariate_t(eta=5.0, rho=0.0).independent_components


class TestPdf:
    def test_standard_gaussian_origin(self):
        spec = ResidualSpec.gaussian(1.0, 1.0, 0.0)
        assert pdf(spec, 0.0, 0.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)

    def test_bivariate_t_origin_any_eta(self):
        for eta in (1.0, 5.0, 42.0):
            spec = ResidualSpec.bivariate_t(eta=eta, rho=0.0)
            assert pdf(spec, 0.0, 0.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)

    def test_independent_cauchy_origin(self):
        spec = ResidualSpec.independent_t(1.0, 1.0)
        assert pdf(spec, 0.0, 0.0) == pytest.approx(1.0 / math.pi**2, rel=1e-13)

    @pytest.mark.parametrize("spec", [
        ResidualSpec.gaussian(SIGMA, SIGMA, 0.0),
        ResidualSpec.gaussian(1.3, 0.7, 0.5),
        ResidualSpec.bivariate_t(eta=5.0, rho=0.4),
    ])
    def test_integrates_to_one(self, spec):
        half = 20.0 * SIGMA
        grid = np.linspace(-half, half, 1201)
        xx, yy = np.meshgrid(grid, grid)
        zz = pdf(spec, xx, yy)
        total = np.trapezoid(np.trapezoid(zz, grid, axis=1), grid)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_independent_t_factorizes_exactly(self):
        spec = ResidualSpec.independent_t(4.0, 7.0, lambda1=2.0, lambda2=0.5)
        gen = np.random.default_rng(1)
        pts = gen.uniform(-8, 8, size=(100, 2))
        joint = pdf(spec, pts[:, 0], pts[:, 1])
        split = (marginal_pdf_t(pts[:, 0], 4.0, 0.0, 2.0)
                 * marginal_pdf_t(pts[:, 1], 7.0, 0.0, 0.5))
        np.testing.assert_allclose(joint, split, rtol=1e-14)

    def test_bivariate_t_zero_rho_not_independent(self):
        spec = ResidualSpec.bivariate_t(eta=5.0, rho=0.0)
        grid = np.linspace(-4, 4, 41)
        xx, yy = np.meshgrid(grid, grid)
        joint = pdf(spec, xx, yy)
        split = marginal_pdf_t(xx, 5.0) * marginal_pdf_t(yy, 5.0)
        assert np.abs(joint - split).max() > 1e-3


class TestMarginalPdfT:
    def test_cauchy_mode(self):
        assert marginal_pdf_t(0.0, 1.0, 0.0, 1.0) == pytest.approx(1.0 / math.pi, rel=1e-14)

    @pytest.mark.parametrize("eta,mu,lam", [(3.0, -1.0, 0.5), (5.0, 0.0, 1.0), (11.0, 4.0, 2.5)])
    def test_mode_value(self, eta, mu, lam):
        from varprod.numerics import log_gamma

        expected = math.exp(log_gamma((eta + 1) / 2) - log_gamma(eta / 2)) / (
            lam * math.sqrt(eta * math.pi)
        )
        assert marginal_pdf_t(mu, eta, mu, lam) == pytest.approx(expected, rel=1e-13)

    def test_value_at_one(self):
        assert marginal_pdf_t(1.0, 5.0) == pytest.approx(0.2197, abs=5e-5)

    def test_against_scipy(self):
        z = np.linspace(-6, 6, 121)
        ours = marginal_pdf_t(z, 4.5, 0.3, 1.7)
        theirs = scipy.stats.t.pdf(z, 4.5, loc=0.3, scale=1.7)
        np.testing.assert_allclose(ours, theirs, rtol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            marginal_pdf_t(0.0, -1.0)
        with pytest.raises(DomainError):
            marginal_pdf_t(0.0, 5.0, 0.0, 0.0)


class TestCdfT:
    def test_symmetry_center(self):
        for eta in (0.7, 2.0, 5.0, 30.0):
            assert cdf_t(0.0, eta) == 0.5

    def test_upper_limit(self):
        assert cdf_t(1e6, 5.0) == pytest.approx(1.0, abs=1e-9)

    def test_standard_quantile(self):
        # 95th percentile of t with 5 dof is 2.015 to three decimals:
        # invert the cdf by bisection and compare
        lo, hi = 0.0, 10.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if cdf_t(mid, 5.0) < 0.95:
                lo = mid
            else:
                hi = mid
        assert 0.5 * (lo + hi) == pytest.approx(2.015, abs=1e-3)

    def test_against_scipy(self):
        z = np.linspace(-8, 8, 161)
        for eta in (1.0, 2.47, 5.0, 50.0):
            ours = cdf_t(z, eta)
            np.testing.assert_allclose(ours, scipy.stats.t.cdf(z, eta), atol=1e-12)

    def test_monotone(self):
        z = np.linspace(-20, 20, 400)
        vals = cdf_t(z, 3.3)
        assert np.all(np.diff(vals) >= 0)


class TestSampling:
    def test_gaussian_correlation(self):
        spec = ResidualSpec.gaussian(1.0, 1.0, 0.8)
        z = sample(spec, 100_000, RandomStream(11))
        r = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
        assert r == pytest.approx(0.8, abs=0.01)

    def test_bivariate_t_variance(self):
        spec = ResidualSpec.bivariate_t(eta=5.0)
        z = sample(spec, 100_000, RandomStream(12))
        assert z[:, 0].var() == pytest.approx(5.0 / 3.0, abs=0.15)
        assert z[:, 1].var() == pytest.approx(5.0 / 3.0, abs=0.15)

    def test_independent_t_uncorrelated(self):
        spec = ResidualSpec.independent_t(5.0, 5.0)
        z = sample(spec, 100_000, RandomStream(13))
        r = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
        assert abs(r) < 0.01

    def test_sample_pair_is_first_draw(self):
        spec = ResidualSpec.gaussian(1.0, 2.0, 0.3)
        a = sample_pair(spec, RandomStream(5))
        b = sample(spec, 1, RandomStream(5))
        assert a == (b[0, 0], b[0, 1])

    def test_mu_shift(self):
        spec = ResidualSpec.independent_t(6.0, 6.0, mu1=3.0, mu2=-1.0)
        z = sample(spec, 50_000, RandomStream(14))
        assert z[:, 0].mean() == pytest.approx(3.0, abs=0.05)
        assert z[:, 1].mean() == pytest.approx(-1.0, abs=0.05)


class TestMoments:
    def test_gaussian_mixed_moment(self):
        spec = ResidualSpec.gaussian(SIGMA, SIGMA, 0.8)
        m = moments(spec)
        assert m.m_z == pytest.approx((25.0 / 9.0) * (1.0 + 2.0 * 0.64), rel=1e-13)

    def test_gaussian_kurtosis(self):
        for s2 in (0.5, 1.0, 3.7):
            spec = ResidualSpec.gaussian(1.0, math.sqrt(s2), 0.2)
            assert moments(spec).kappa_z == pytest.approx(3.0 * s2 * s2, rel=1e-13)

    def test_bivariate_t_fourth_moment(self):
        # scale mixture: E[Z^4] = 3 eta^2 / ((eta-2)(eta-4)) at unit scale
        m = moments(ResidualSpec.bivariate_t(eta=5.0))
        assert m.kappa_z == pytest.approx(25.0, rel=1e-13)
        assert m.m_z == pytest.approx(25.0 / 3.0, rel=1e-13)

    def test_independent_t_matches_scipy_marginal(self):
        spec = ResidualSpec.independent_t(9.0, 6.0, lambda1=2.0, lambda2=0.7)
        m = moments(spec)
        assert m.kappa_z == pytest.approx(
            scipy.stats.t.moment(4, 6.0, scale=0.7), rel=1e-10
        )
        assert m.gamma_z[0, 0] == pytest.approx(scipy.stats.t.var(9.0, scale=2.0), rel=1e-12)

    def test_m4_symmetric_under_permutations(self):
        specs = [
            ResidualSpec.gaussian(1.2, 0.8, -0.4),
            ResidualSpec.bivariate_t(eta=6.5, rho=0.3, lambda1=1.5, lambda2=0.5),
            ResidualSpec.independent_t(5.5, 8.0),
        ]
        for spec in specs:
            m4 = moments(spec).m4
            for perm in itertools.permutations(range(4)):
                np.testing.assert_allclose(m4, np.transpose(m4, perm), rtol=1e-12)

    def test_gamma_entries(self):
        spec = ResidualSpec.gaussian(1.5, 0.5, 0.6)
        g = second_moments(spec)
        assert g[0, 1] == pytest.approx(0.6 * 1.5 * 0.5, rel=1e-14)
        assert g[0, 1] == g[1, 0]

    def test_heavy_tail_guards(self):
        with pytest.raises(HeavyTailError):
            moments(ResidualSpec.bivariate_t(eta=4.0))
        with pytest.raises(HeavyTailError):
            moments(ResidualSpec.independent_t(5.0, 3.5))
        with pytest.raises(HeavyTailError):
            second_moments(ResidualSpec.bivariate_t(eta=2.0))
        # second moments exist between 2 and 4 even though fourth do not
        g = second_moments(ResidualSpec.independent_t(2.47, 2.47, lambda1=3.03))
        assert g[0, 0] == pytest.approx(3.03**2 * 2.47 / 0.47, rel=1e-12)

    @pytest.mark.parametrize("spec", [
        ResidualSpec.gaussian(1.0, 1.3, 0.5),
        ResidualSpec.bivariate_t(eta=9.0, rho=-0.6),
        ResidualSpec.independent_t(9.0, 12.0, lambda1=0.8, lambda2=1.4),
    ], ids=["gaussian", "bivariate-t", "independent-t"])
    def test_m4_against_monte_carlo(self, spec):
        # every tensor entry within 4 standard errors of its MC estimate
        z = sample(spec, 1_000_000, RandomStream(31))
        m4 = moments(spec).m4
        for idx in itertools.product(range(2), repeat=4):
            prod = z[:, idx[0]] * z[:, idx[1]] * z[:, idx[2]] * z[:, idx[3]]
            se = prod.std(ddof=1) / math.sqrt(prod.size)
            assert abs(prod.mean() - m4[idx]) <= 4.0 * se, idx

    def test_second_moments_against_monte_carlo(self):
        spec = ResidualSpec.bivariate_t(eta=5.0, rho=0.8)
        z = sample(spec, 1_000_000, RandomStream(32))
        g = second_moments(spec)
        cov = z.T @ z / z.shape[0]
        corr = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
        assert cov[0, 0] == pytest.approx(g[0, 0], rel=0.05)
        assert corr == pytest.approx(0.8, abs=0.01)
