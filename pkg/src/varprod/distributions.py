"""Residual-distribution families for the bi-dimensional model.

Three families are supported:

* bivariate Gaussian with per-component standard deviations and a
  correlation coefficient,
* bivariate Student's t built as a correlated standard Gaussian pair
  divided by a shared sqrt(chi2 / eta) factor (one eta for both margins;
  rho = 0 does NOT make the components independent),
* independent Student's t margins with their own degrees of freedom.

Student's t margins carry location-scale parameters: z = mu + lambda * t_eta,
with variance lambda^2 * eta / (eta - 2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HeavyTailError, InvalidSpecError
from .numerics import RandomStream, log_gamma, regularized_incomplete_beta

__all__ = [
    "Family",
    "ResidualSpec",
    "MomentSet",
    "pdf",
    "marginal_pdf_t",
    "cdf_t",
    "sample",
    "sample_pair",
    "second_moments",
    "moments",
]


class Family(enum.Enum):
    GAUSSIAN = "gaussian"
    BIVARIATE_T = "t"
    INDEPENDENT_T = "t-indep"


@dataclass(frozen=True)
class ResidualSpec:
    """Parameters of one residual family.

    Only the fields relevant to ``family`` are used: Gaussian reads
    (sigma1, sigma2, rho), the bivariate t reads (lambda1, lambda2, rho,
    eta), the independent t reads (lambda1, lambda2, eta1, eta2).  mu1 and
    mu2 shift the components and default to zero, which is what the
    zero-mean residual series requires.
    """

    family: Family
    sigma1: float = 1.0
    sigma2: float = 1.0
    rho: float = 0.0
    eta: float | None = None
    eta1: float | None = None
    eta2: float | None = None
    lambda1: float = 1.0
    lambda2: float = 1.0
    mu1: float = 0.0
    mu2: float = 0.0

    def __post_init__(self):
        if not isinstance(self.family, Family):
            raise InvalidSpecError(f"unknown family {self.family!r}")
        if self.family is Family.GAUSSIAN:
            if not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
                raise InvalidSpecError("Gaussian standard deviations must be positive")
            if not -1.0 < self.rho < 1.0:
                raise InvalidSpecError(f"correlation must lie in (-1, 1), got {self.rho}")
        elif self.family is Family.BIVARIATE_T:
            if self.eta is None or not self.eta > 0.0:
                raise InvalidSpecError("bivariate t requires eta > 0")
            if not (self.lambda1 > 0.0 and self.lambda2 > 0.0):
                raise InvalidSpecError("scale parameters must be positive")
            if not -1.0 < self.rho < 1.0:
                raise InvalidSpecError(f"correlation must lie in (-1, 1), got {self.rho}")
        elif self.family is Family.INDEPENDENT_T:
            if self.eta1 is None or self.eta2 is None or not (self.eta1 > 0.0 and self.eta2 > 0.0):
                raise InvalidSpecError("independent t requires eta1 > 0 and eta2 > 0")
            if not (self.lambda1 > 0.0 and self.lambda2 > 0.0):
                raise InvalidSpecError("scale parameters must be positive")

    @classmethod
    def gaussian(cls, sigma1: float, sigma2: float, rho: float = 0.0,
                 mu1: float = 0.0, mu2: float = 0.0) -> "ResidualSpec":
        return cls(Family.GAUSSIAN, sigma1=sigma1, sigma2=sigma2, rho=rho, mu1=mu1, mu2=mu2)

    @classmethod
    def bivariate_t(cls, eta: float, rho: float = 0.0,
                    lambda1: float = 1.0, lambda2: float = 1.0,
                    mu1: float = 0.0, mu2: float = 0.0) -> "ResidualSpec":
        return cls(Family.BIVARIATE_T, eta=eta, rho=rho,
                   lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2)

    @classmethod
    def independent_t(cls, eta1: float, eta2: float,
                      lambda1: float = 1.0, lambda2: float = 1.0,
                      mu1: float = 0.0, mu2: float = 0.0) -> "ResidualSpec":
        return cls(Family.INDEPENDENT_T, eta1=eta1, eta2=eta2,
                   lambda1=lambda1, lambda2=lambda2, mu1=mu1, mu2=mu2)

    def marginal_variance(self, i: int) -> float:
        """Variance of component i (1 or 2); requires eta > 2 for t margins."""
        if i not in (1, 2):
            raise DomainError(f"component index must be 1 or 2, got {i}")
        if self.family is Family.GAUSSIAN:
            return (self.sigma1 if i == 1 else self.sigma2) ** 2
        if self.family is Family.BIVARIATE_T:
            eta = self.eta
        else:
            eta = self.eta1 if i == 1 else self.eta2
        if eta <= 2.0:
            raise HeavyTailError(f"variance of component {i} diverges for eta = {eta} <= 2")
        lam = self.lambda1 if i == 1 else self.lambda2
        return lam * lam * eta / (eta - 2.0)

    @property
    def independent_components(self) -> bool:
        """True only for families whose joint density factorizes."""
        if self.family is Family.INDEPENDENT_T:
            return True
        return self.family is Family.GAUSSIAN and self.rho == 0.0


@dataclass(frozen=True)
class MomentSet:
    """Second moments and the full fourth-moment tensor of a residual pair.

    ``gamma_z`` is the 2x2 covariance, ``m4[k, l, n, r]`` (zero-based) is
    E[Z_{k+1} Z_{l+1} Z_{n+1} Z_{r+1}].  The mixed moment E[Z1^2 Z2^2] and
    the fourth moment E[Z2^4] used by the closed-form autocovariances are
    views into the tensor.
    """

    gamma_z: np.ndarray
    m4: np.ndarray = field(repr=False)

    @property
    def m_z(self) -> float:
        return float(self.m4[0, 0, 1, 1])

    @property
    def kappa_z(self) -> float:
        return float(self.m4[1, 1, 1, 1])


def _log_t_norm(eta: float) -> float:
    """log of Gamma((eta+1)/2) / (sqrt(eta pi) Gamma(eta/2))."""
    return log_gamma((eta + 1.0) / 2.0) - log_gamma(eta / 2.0) - 0.5 * math.log(eta * math.pi)


def marginal_pdf_t(z, eta: float, mu: float = 0.0, lam: float = 1.0):
    """Density of the location-scale Student's t, mu + lambda * t_eta, at z."""
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    if not lam > 0.0:
        raise DomainError(f"lambda must be positive, got {lam!r}")
    z = np.asarray(z, dtype=float)
    u = (z - mu) / lam
    logpdf = _log_t_norm(eta) - math.log(lam) - 0.5 * (eta + 1.0) * np.log1p(u * u / eta)
    out = np.exp(logpdf)
    return float(out) if out.ndim == 0 else out


def cdf_t(z, eta: float):
    """CDF of the standard Student's t with eta > 0 degrees of freedom.

    Uses I_x(eta/2, 1/2) with x = eta / (eta + z^2) on the matching tail,
    so the result is exact-symmetric about zero.
    """
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta!r}")
    scalar = np.isscalar(z)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        if zi == 0.0:
            out[i] = 0.5
            continue
        x = eta / (eta + zi * zi)
        tail = 0.5 * regularized_incomplete_beta(eta / 2.0, 0.5, x)
        out[i] = tail if zi < 0.0 else 1.0 - tail
    return float(out[0]) if scalar else out


def pdf(spec: ResidualSpec, z1, z2):
    """Joint density of the residual pair at (z1, z2); broadcasts over arrays."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if spec.family is Family.GAUSSIAN:
        s1, s2, rho = spec.sigma1, spec.sigma2, spec.rho
        u1 = (z1 - spec.mu1) / s1
        u2 = (z2 - spec.mu2) / s2
        q = (u1 * u1 - 2.0 * rho * u1 * u2 + u2 * u2) / (1.0 - rho * rho)
        out = np.exp(-0.5 * q) / (2.0 * math.pi * s1 * s2 * math.sqrt(1.0 - rho * rho))
    elif spec.family is Family.BIVARIATE_T:
        eta, rho = spec.eta, spec.rho
        u1 = (z1 - spec.mu1) / spec.lambda1
        u2 = (z2 - spec.mu2) / spec.lambda2
        q = (u1 * u1 - 2.0 * rho * u1 * u2 + u2 * u2) / (eta * (1.0 - rho * rho))
        out = (
            np.power(1.0 + q, -0.5 * (eta + 2.0))
            / (2.0 * math.pi * math.sqrt(1.0 - rho * rho) * spec.lambda1 * spec.lambda2)
        )
    else:
        out = (marginal_pdf_t(z1, spec.eta1, spec.mu1, spec.lambda1)
               * marginal_pdf_t(z2, spec.eta2, spec.mu2, spec.lambda2))
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def sample(spec: ResidualSpec, n: int, rng: RandomStream) -> np.ndarray:
    """n residual pairs as an (n, 2) array, consuming only `rng`."""
    if spec.family is Family.GAUSSIAN:
        s1, s2, rho = spec.sigma1, spec.sigma2, spec.rho
        norm = rng.normal((n, 2))
        z1 = s1 * norm[:, 0]
        z2 = s2 * (rho * norm[:, 0] + math.sqrt(1.0 - rho * rho) * norm[:, 1])
    elif spec.family is Family.BIVARIATE_T:
        rho = spec.rho
        norm = rng.normal((n, 2))
        n1 = norm[:, 0]
        n2 = rho * norm[:, 0] + math.sqrt(1.0 - rho * rho) * norm[:, 1]
        w = np.sqrt(spec.eta / rng.chisquare(spec.eta, n))
        z1 = spec.lambda1 * n1 * w
        z2 = spec.lambda2 * n2 * w
    else:
        norm = rng.normal((n, 2))
        w1 = np.sqrt(spec.eta1 / rng.chisquare(spec.eta1, n))
        w2 = np.sqrt(spec.eta2 / rng.chisquare(spec.eta2, n))
        z1 = spec.lambda1 * norm[:, 0] * w1
        z2 = spec.lambda2 * norm[:, 1] * w2
    return np.column_stack((z1 + spec.mu1, z2 + spec.mu2))


def sample_pair(spec: ResidualSpec, rng: RandomStream) -> tuple[float, float]:
    """One residual pair (Z1, Z2)."""
    z = sample(spec, 1, rng)
    return float(z[0, 0]), float(z[0, 1])


def second_moments(spec: ResidualSpec) -> np.ndarray:
    """Covariance matrix of the pair; requires eta > 2 for t margins."""
    v1 = spec.marginal_variance(1)
    v2 = spec.marginal_variance(2)
    if spec.family is Family.GAUSSIAN:
        cov = spec.rho * spec.sigma1 * spec.sigma2
    elif spec.family is Family.BIVARIATE_T:
        # correlation of the t pair equals the Gaussian rho
        cov = spec.rho * math.sqrt(v1 * v2)
    else:
        cov = 0.0
    return np.array([[v1, cov], [cov, v2]])


def _isserlis4(c: np.ndarray) -> np.ndarray:
    """Fourth-moment tensor of a zero-mean Gaussian pair with covariance c."""
    m4 = np.empty((2, 2, 2, 2))
    for k in range(2):
        for l in range(2):
            for p in range(2):
                for r in range(2):
                    m4[k, l, p, r] = c[k, l] * c[p, r] + c[k, p] * c[l, r] + c[k, r] * c[l, p]
    return m4


def moments(spec: ResidualSpec) -> MomentSet:
    """Exact second moments and fourth-moment tensor.

    Gaussian tensors come from the pairwise-product expansion; the
    bivariate t multiplies the Gaussian tensor of its underlying unit
    pair by E[W^4] = eta^2 / ((eta - 2)(eta - 4)) where W is the shared
    sqrt(eta / chi2) mixing factor; the independent t factorizes with
    per-component fourth moment 3 lambda^4 eta^2 / ((eta - 2)(eta - 4)).
    """
    gamma = second_moments(spec)  # raises HeavyTailError when eta <= 2
    if spec.family is Family.GAUSSIAN:
        m4 = _isserlis4(gamma)
    elif spec.family is Family.BIVARIATE_T:
        eta = spec.eta
        if eta <= 4.0:
            raise HeavyTailError(f"fourth moments diverge for eta = {eta} <= 4")
        w4 = eta * eta / ((eta - 2.0) * (eta - 4.0))
        unit = np.array([[1.0, spec.rho], [spec.rho, 1.0]])
        lam = np.array([spec.lambda1, spec.lambda2])
        scale = np.einsum("k,l,n,r->klnr", lam, lam, lam, lam)
        m4 = w4 * scale * _isserlis4(unit)
    else:
        for eta in (spec.eta1, spec.eta2):
            if eta <= 4.0:
                raise HeavyTailError(f"fourth moments diverge for eta = {eta} <= 4")
        v1, v2 = gamma[0, 0], gamma[1, 1]
        q1 = 3.0 * spec.lambda1 ** 4 * spec.eta1 ** 2 / ((spec.eta1 - 2.0) * (spec.eta1 - 4.0))
        q2 = 3.0 * spec.lambda2 ** 4 * spec.eta2 ** 2 / ((spec.eta2 - 2.0) * (spec.eta2 - 4.0))
        m4 = np.zeros((2, 2, 2, 2))
        m4[0, 0, 0, 0] = q1
        m4[1, 1, 1, 1] = q2
        # E[Z1^2 Z2^2] over the three pairings of (1,1,2,2)
        for idx in ((0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0),
                    (1, 1, 0, 0), (1, 0, 1, 0), (1, 0, 0, 1)):
            m4[idx] = v1 * v2
    return MomentSet(gamma_z=gamma, m4=m4)
