"""Sample autocovariances, correlation, and Monte Carlo bands."""

import math

import numpy as np
import pytest
from conftest import SIGMA

from varprod.distributions import ResidualSpec
from varprod.errors import DegenerateDataError, ValidationError
from varprod.estimators import (
    ConfidenceBand,
    empirical_acvf,
    empirical_ccvf,
    mc_confidence_bounds,
    sample_correlation,
)
from varprod.numerics import RandomStream, substream
from varprod.var1 import TransitionMatrix, Var1Model


def brute_acvf(y, h):
    y = np.asarray(y, dtype=float)
    yc = y - y.mean()
    return float(np.dot(yc[: len(y) - h], yc[h:]) / len(y))


class TestEmpiricalAcvf:
    def test_constant_series(self):
        curve = empirical_acvf(np.full(100, 3.7), 5)
        np.testing.assert_allclose(curve.values, 0.0, atol=1e-14)

    def test_alternating_series(self):
        y = np.tile([1.0, -1.0], 500)
        curve = empirical_acvf(y, 1)
        assert curve.values[1] == pytest.approx(-0.999, abs=1e-12)

    def test_iid_gaussian(self):
        y = RandomStream(8).normal(100_000)
        curve = empirical_acvf(y, 1)
        assert curve.values[0] == pytest.approx(1.0, abs=0.02)
        assert curve.values[1] == pytest.approx(0.0, abs=0.01)

    def test_brute_force_agreement(self):
        y = RandomStream(9).normal(777)
        curve = empirical_acvf(y, 20)
        for h in range(21):
            assert curve.values[h] == pytest.approx(brute_acvf(y, h), abs=1e-12)

    def test_reversal_invariance_at_lag_zero(self):
        y = RandomStream(10).normal(512)
        assert empirical_acvf(y, 0).values[0] == pytest.approx(
            empirical_acvf(y[::-1], 0).values[0], rel=1e-12
        )

    def test_too_short(self):
        with pytest.raises(ValidationError):
            empirical_acvf(np.ones(5), 5)


class TestEmpiricalCcvf:
    def test_self_matches_acvf(self):
        y = RandomStream(11).normal(400)
        np.testing.assert_allclose(
            empirical_ccvf(y, y, 8).values, empirical_acvf(y, 8).values, atol=1e-13
        )

    def test_independent_streams(self):
        a = RandomStream(12).normal(100_000)
        b = RandomStream(13).normal(100_000)
        curve = empirical_ccvf(a, b, 3)
        np.testing.assert_allclose(curve.values, 0.0, atol=0.01)

    def test_shifted_alignment(self):
        a = RandomStream(14).normal(10_000)
        b = np.roll(a, 1)  # b(t+1) = a(t)
        curve = empirical_ccvf(a, b, 1)
        assert curve.values[1] == pytest.approx(a.var(), rel=0.01)

    def test_brute_force_agreement(self):
        gen = np.random.default_rng(44)
        a, b = gen.standard_normal((2, 333))
        got = empirical_ccvf(a, b, 7).values
        ac, bc = a - a.mean(), b - b.mean()
        for h in range(8):
            want = float(np.dot(ac[: 333 - h], bc[h:]) / 333)
            assert got[h] == pytest.approx(want, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            empirical_ccvf(np.ones(10), np.ones(11), 2)


class TestSampleCorrelation:
    def test_perfect(self):
        y = np.arange(50.0)
        assert sample_correlation(y, y) == pytest.approx(1.0, rel=1e-12)
        assert sample_correlation(y, -y) == pytest.approx(-1.0, rel=1e-12)

    def test_gaussian_half_correlation(self):
        rng = RandomStream(15)
        z = rng.normal((100_000, 2))
        a = z[:, 0]
        b = 0.5 * z[:, 0] + math.sqrt(0.75) * z[:, 1]
        assert sample_correlation(a, b) == pytest.approx(0.5, abs=0.01)

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            sample_correlation(np.ones(10), np.arange(10.0))


class TestMcConfidenceBounds:
    @pytest.fixture
    def model(self):
        return Var1Model(TransitionMatrix.diagonal(0.8, 0.8),
                         ResidualSpec.gaussian(SIGMA, SIGMA))

    def test_degenerate_substreams_collapse_band(self, model):
        band = mc_confidence_bounds(
            model, n=200, reps=2, hmax=4, rng=RandomStream(1),
            substream_fn=lambda rng, i: substream(rng, 0),
        )
        np.testing.assert_array_equal(band.lower, band.upper)

    def test_deterministic(self, model):
        a = mc_confidence_bounds(model, n=150, reps=50, hmax=5, rng=RandomStream(2))
        b = mc_confidence_bounds(model, n=150, reps=50, hmax=5, rng=RandomStream(2))
        np.testing.assert_array_equal(a.lower, b.lower)
        np.testing.assert_array_equal(a.upper, b.upper)

    def test_band_ordering_and_shape(self, model):
        band = mc_confidence_bounds(model, n=100, reps=100, hmax=10, rng=RandomStream(3))
        assert band.lags.shape == (11,)
        assert np.all(band.lower <= band.upper)
        assert band.reps == 100 and band.n == 100

    def test_band_stabilizes_with_replications(self, model):
        kw = dict(n=300, hmax=5, rng=RandomStream(4))
        small = mc_confidence_bounds(model, reps=1000, **kw)
        kw = dict(n=300, hmax=5, rng=RandomStream(4))
        large = mc_confidence_bounds(model, reps=5000, **kw)
        scale = np.abs(large.upper - large.lower)
        assert np.all(np.abs(small.lower - large.lower) < 0.05 * scale + 0.05 * np.abs(large.lower))
        assert np.all(np.abs(small.upper - large.upper) < 0.05 * scale + 0.05 * np.abs(large.upper))

    def test_heavier_tails_widen_band(self):
        gauss = Var1Model(TransitionMatrix.diagonal(0.8, 0.8),
                          ResidualSpec.gaussian(SIGMA, SIGMA))
        heavy = Var1Model(TransitionMatrix.diagonal(0.8, 0.8),
                          ResidualSpec.independent_t(5.0, 5.0))
        bg = mc_confidence_bounds(gauss, n=100, reps=1000, hmax=0, rng=RandomStream(5))
        bt = mc_confidence_bounds(heavy, n=100, reps=1000, hmax=0, rng=RandomStream(5))
        assert (bt.upper[0] - bt.lower[0]) > (bg.upper[0] - bg.lower[0])

    def test_needs_two_reps(self, model):
        with pytest.raises(ValidationError):
            mc_confidence_bounds(model, n=50, reps=1, hmax=2, rng=RandomStream(6))

    def test_covers(self):
        band = ConfidenceBand(np.arange(3), np.zeros(3), np.ones(3), 0.05, 0.95, 10, 10)
        np.testing.assert_array_equal(band.covers([0.5, -0.1, 1.0]), [True, False, True])
