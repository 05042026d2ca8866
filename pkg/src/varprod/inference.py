"""Model fitting and residual diagnostics.

Conventions fixed here: the lag-h sample moment matrix is
G(h) = E[x(t+h) x(t)^T] estimated with mean subtraction and 1/n
normalization, the coefficient estimate is G(1) G(0)^{-1}, the
correlation t test and Kolmogorov-Smirnov p-values are asymptotic, and
the chi-square independence table uses quantile (equal-probability)
cells.  The KS p-value does not correct for estimated parameters.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .distributions import cdf_t
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    InsufficientDataError,
    SingularMomentError,
    ValidationError,
)
from .numerics import kolmogorov_cdf, log_gamma, regularized_gamma_q
from .estimators import sample_correlation
from .var1 import Trajectory, TransitionMatrix

__all__ = [
    "TestName",
    "TestResult",
    "GaussianFit",
    "TLocScaleFit",
    "DistFit",
    "FitReport",
    "yule_walker_var1",
    "extract_residuals",
    "fit_gaussian_zero_mean",
    "fit_t_locscale",
    "corr_t_test",
    "chi2_independence",
    "ks_test",
]

ETA_CAP = 200.0  # beyond this the t likelihood is flat; treat as Gaussian


class TestName(enum.Enum):
    CORR_T = "corr_t"
    CHI2_INDEPENDENCE = "chi2_independence"
    KS_GOODNESS = "ks_goodness"


@dataclass(frozen=True)
class TestResult:
    name: TestName
    statistic: float
    p_value: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p-value outside [0, 1]: {self.p_value}")


@dataclass(frozen=True)
class GaussianFit:
    sigma: float
    loglik: float


@dataclass(frozen=True)
class TLocScaleFit:
    mu: float
    lam: float
    eta: float
    loglik: float
    effectively_gaussian: bool = False
    iterations: int = 0


@dataclass(frozen=True)
class DistFit:
    """Fitted marginal for one residual component, as reported downstream."""

    family: str
    mu: float
    lam: float | None
    eta: float | None
    loglik: float
    ks_p: float | None = None


@dataclass(frozen=True)
class FitReport:
    phi_hat: TransitionMatrix
    residual_cov: np.ndarray
    rho_z_hat: float
    dist_fits: tuple[DistFit, ...]
    test_results: tuple[TestResult, ...]


def yule_walker_var1(traj: Trajectory) -> tuple[TransitionMatrix, np.ndarray]:
    """Moment estimate of the coefficient matrix and residual covariance.

    G(1) G(0)^{-1} for the coefficients, G(0) - Phi G(1)^T (symmetrized)
    for the residual covariance.
    """
    n = len(traj)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 observations, got {n}")
    x = traj.as_array()
    xc = x - x.mean(axis=0)
    g0 = xc.T @ xc / n
    g1 = xc[1:].T @ xc[:-1] / n
    if not np.isfinite(np.linalg.cond(g0)) or np.linalg.cond(g0) > 1e12:
        raise SingularMomentError("sample covariance matrix is singular")
    phi_hat = g1 @ np.linalg.inv(g0)
    resid_cov = g0 - phi_hat @ g1.T
    resid_cov = 0.5 * (resid_cov + resid_cov.T)
    return TransitionMatrix.from_array(phi_hat), resid_cov


def extract_residuals(phi: TransitionMatrix, traj: Trajectory) -> Trajectory:
    """One-step-ahead residuals z(t) = x(t) - Phi x(t-1) for t = 2..n."""
    if len(traj) < 2:
        raise InsufficientDataError("need at least 2 observations")
    x = traj.as_array()
    z = x[1:] - x[:-1] @ phi.as_array().T
    return Trajectory(x1=z[:, 0], x2=z[:, 1])


def fit_gaussian_zero_mean(series) -> GaussianFit:
    """Zero-mean Gaussian scale fit: sigma^2 = mean of squares."""
    z = np.asarray(series, dtype=float)
    if z.size < 2:
        raise InsufficientDataError("need at least 2 observations")
    s2 = float(np.mean(z * z))
    if s2 == 0.0:
        raise DegenerateDataError("all observations are zero")
    n = z.size
    loglik = -0.5 * n * (math.log(2.0 * math.pi * s2) + 1.0)
    return GaussianFit(sigma=math.sqrt(s2), loglik=loglik)


def _t_nll(z: np.ndarray, mu: float, log_lam: float, eta: float) -> float:
    lam = math.exp(log_lam)
    u = (z - mu) / lam
    norm = log_gamma((eta + 1.0) / 2.0) - log_gamma(eta / 2.0) - 0.5 * math.log(eta * math.pi)
    return float(-z.size * (norm - log_lam) + 0.5 * (eta + 1.0) * np.sum(np.log1p(u * u / eta)))


def fit_t_locscale(series, fix_mu_at_zero: bool = True,
                   max_iter: int = 2000, min_eta: float = 0.0) -> TLocScaleFit:
    """Maximum-likelihood location-scale Student's t fit.

    Nelder-Mead over (mu, log lambda, log eta), or the last two when the
    location is pinned at zero.  Starts from a trimmed scale estimate and
    eta = 6; eta is capped at ETA_CAP, and hitting the cap flags the
    sample as effectively Gaussian.  A positive ``min_eta`` constrains
    the search to eta > min_eta (through the shift eta = min_eta + e^u),
    which callers use to stay inside a finite-variance model class.
    """
    z = np.asarray(series, dtype=float)
    if z.size < 10:
        raise InsufficientDataError(f"need at least 10 observations, got {z.size}")
    q25, q75 = np.quantile(z, [0.25, 0.75])
    scale0 = (q75 - q25) / 1.349
    if scale0 <= 0.0:
        scale0 = float(np.std(z))
    if scale0 <= 0.0:
        raise DegenerateDataError("series has no spread")
    eta_of = lambda u: min(min_eta + math.exp(u), ETA_CAP)
    log_eta0 = math.log(max(6.0 - min_eta, 1.0))

    if fix_mu_at_zero:
        x0 = np.array([math.log(scale0), log_eta0])
        fun = lambda th: _t_nll(z, 0.0, th[0], eta_of(th[1]))
    else:
        x0 = np.array([float(np.median(z)), math.log(scale0), log_eta0])
        fun = lambda th: _t_nll(z, th[0], th[1], eta_of(th[2]))

    f0 = fun(x0)
    res = optimize.minimize(
        fun, x0, method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 4 * max_iter,
                 "fatol": 1e-10 * max(1.0, abs(f0)), "xatol": 1e-8},
    )
    th = res.x
    if fix_mu_at_zero:
        mu, log_lam, eta = 0.0, th[0], eta_of(th[1])
    else:
        mu, log_lam, eta = th[0], th[1], eta_of(th[2])
    fit = TLocScaleFit(
        mu=float(mu),
        lam=math.exp(log_lam),
        eta=eta,
        loglik=-float(res.fun),
        effectively_gaussian=eta >= ETA_CAP * 0.999,
        iterations=int(res.nit),
    )
    if not res.success:
        raise ConvergenceError(
            f"t location-scale fit did not converge in {max_iter} iterations", best=fit
        )
    return fit


def corr_t_test(a, b) -> TestResult:
    """Two-sided t test of zero Pearson correlation.

    t = r sqrt(n - 2) / sqrt(1 - r^2) against Student's t with n - 2
    degrees of freedom.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("samples must be 1-d and of equal length")
    n = a.size
    if n < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {n}")
    r = sample_correlation(a, b)
    dof = n - 2
    if abs(r) >= 1.0:
        return TestResult(TestName.CORR_T, math.copysign(math.inf, r), 0.0,
                          {"r": r, "dof": dof, "n": n})
    t = r * math.sqrt(dof) / math.sqrt(1.0 - r * r)
    p = 2.0 * (1.0 - cdf_t(abs(t), dof))
    return TestResult(TestName.CORR_T, t, min(1.0, max(0.0, p)),
                      {"r": r, "dof": dof, "n": n})


def chi2_independence(a, b, bins: int = 4) -> TestResult:
    """Chi-square independence test on a quantile-binned contingency table.

    Each margin is split into ``bins`` equal-probability cells by its own
    sample quantiles; the statistic is referred to chi-square with
    (bins - 1)^2 degrees of freedom.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("samples must be 1-d and of equal length")
    if bins < 2:
        raise ValidationError(f"need at least 2 bins per margin, got {bins}")
    n = a.size
    if n < 5 * bins * bins:
        raise InsufficientDataError(
            f"need at least {5 * bins * bins} pairs for {bins}x{bins} cells, got {n}"
        )
    qs = np.arange(1, bins) / bins
    ia = np.searchsorted(np.quantile(a, qs), a, side="right")
    ib = np.searchsorted(np.quantile(b, qs), b, side="right")
    table = np.zeros((bins, bins))
    np.add.at(table, (ia, ib), 1.0)
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    mask = expected > 0
    stat = float(np.sum((table[mask] - expected[mask]) ** 2 / expected[mask]))
    dof = (bins - 1) ** 2
    p = regularized_gamma_q(dof / 2.0, stat / 2.0)
    return TestResult(TestName.CHI2_INDEPENDENCE, stat, p,
                      {"dof": dof, "bins": bins, "n": n})


def ks_test(series, cdf) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a fully specified CDF.

    D is the sup distance taking both one-sided gaps at the order
    statistics; the p-value is the asymptotic 1 - K(sqrt(n) D), with no
    correction for parameters estimated from the same sample.
    """
    z = np.sort(np.asarray(series, dtype=float))
    n = z.size
    if n < 10:
        raise InsufficientDataError(f"need at least 10 observations, got {n}")
    f = np.asarray([cdf(v) for v in z], dtype=float)
    if np.any(np.diff(f) < -1e-12):
        raise ValidationError("cdf callable is not monotone on the sample")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    p = 1.0 - kolmogorov_cdf(math.sqrt(n) * d)
    return TestResult(TestName.KS_GOODNESS, d, min(1.0, max(0.0, p)), {"n": n})
