"""Empirical second-order estimators and Monte Carlo confidence bands.

Autocovariances use the biased 1/n normalization with mean subtraction
(the positive-semidefinite convention); band quantiles use linear
interpolation on the order statistics, numpy's default.  Replication r
of the band harness draws from ``substream(rng, r)``, so bands are
reproducible and independent of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import sample
from .errors import DegenerateDataError, ValidationError
from .numerics import RandomStream, substream
from .product_acvf import AcvfCurve
from .var1 import Var1Model

__all__ = [
    "ConfidenceBand",
    "empirical_acvf",
    "empirical_ccvf",
    "sample_correlation",
    "mc_confidence_bounds",
]


@dataclass(frozen=True)
class ConfidenceBand:
    """Per-lag empirical quantile envelope over Monte Carlo replications."""

    lags: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level_low: float
    level_high: float
    reps: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "lags", np.asarray(self.lags, dtype=int))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if not (self.lags.shape == self.lower.shape == self.upper.shape):
            raise ValidationError("band arrays must share one shape")
        if np.any(self.lower > self.upper):
            raise ValidationError("band lower bound exceeds upper bound")

    def covers(self, values) -> np.ndarray:
        """Elementwise: does the band contain each value?"""
        values = np.asarray(values, dtype=float)
        return (values >= self.lower) & (values <= self.upper)


def _as_series(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    return np.ascontiguousarray(x)


def empirical_acvf(series, hmax: int) -> AcvfCurve:
    """Biased sample autocovariances (1/n) sum (y_t - ybar)(y_{t+h} - ybar)."""
    y = _as_series(series, "series")
    if len(y) <= hmax:
        raise ValidationError(f"series length {len(y)} must exceed hmax {hmax}")
    return AcvfCurve(np.arange(hmax + 1), kernels.acvf_biased(y, hmax))


def empirical_ccvf(a, b, hmax: int) -> AcvfCurve:
    """Biased sample cross-covariances (1/n) sum (a_t - abar)(b_{t+h} - bbar)."""
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    if a.shape != b.shape:
        raise ValidationError("series must have equal length")
    if len(a) <= hmax:
        raise ValidationError(f"series length {len(a)} must exceed hmax {hmax}")
    return AcvfCurve(np.arange(hmax + 1), kernels.ccvf_biased(a, b, hmax))


def sample_correlation(a, b) -> float:
    """Pearson correlation of two equal-length samples."""
    a = _as_series(a, "a")
    b = _as_series(b, "b")
    if a.shape != b.shape:
        raise ValidationError("series must have equal length")
    if len(a) < 2:
        raise ValidationError("need at least two points")
    ac = a - a.mean()
    bc = b - b.mean()
    va = np.dot(ac, ac)
    vb = np.dot(bc, bc)
    if va == 0.0 or vb == 0.0:
        raise DegenerateDataError("sample correlation undefined for a constant series")
    return float(np.dot(ac, bc) / np.sqrt(va * vb))


def mc_confidence_bounds(
    model: Var1Model,
    n: int,
    reps: int,
    hmax: int,
    level_low: float = 0.05,
    level_high: float = 0.95,
    rng: RandomStream | None = None,
    burnin: int = 1000,
    substream_fn=substream,
) -> ConfidenceBand:
    """Quantile band of the product-series empirical autocovariance.

    Simulates ``reps`` independent trajectories of length ``n``, computes
    each product series' empirical autocovariance at lags 0..hmax, and
    returns the per-lag empirical quantiles at the two levels.
    ``substream_fn`` exists so tests can force degenerate replications.
    """
    model.require_stable()
    if reps < 2:
        raise ValidationError(f"need at least two replications, got {reps}")
    if not 0.0 < level_low <= level_high < 1.0:
        raise ValidationError(f"levels must satisfy 0 < low <= high < 1, got {level_low}, {level_high}")
    if rng is None:
        raise ValidationError("mc_confidence_bounds needs a RandomStream")
    p = model.phi
    steps = burnin + n
    # draw per replication from its own substream, then run the batched kernel
    z = np.empty((reps, steps, 2))
    for r in range(reps):
        z[r] = sample(model.residual, steps, substream_fn(rng, r))
    paths = kernels.var1_recursion_batch(p.phi11, p.phi12, p.phi21, p.phi22, z, burnin)
    prod = (paths[:, :, 0] + model.mean_shift) * paths[:, :, 1]
    acvfs = kernels.acvf_biased_batch(np.ascontiguousarray(prod), hmax)
    lower = np.quantile(acvfs, level_low, axis=0)
    upper = np.quantile(acvfs, level_high, axis=0)
    return ConfidenceBand(np.arange(hmax + 1), lower, upper,
                          level_low, level_high, reps, n)
