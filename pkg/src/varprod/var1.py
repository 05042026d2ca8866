"""Bi-dimensional VAR(1) model with real-eigenvalue transition matrices.

The model is x(t) = Phi x(t-1) + z(t) with a 2x2 coefficient matrix and
i.i.d. zero-mean residual pairs.  Powers of Phi are evaluated in closed
form from the eigenvalues, and all stationary second-order quantities are
geometric series in those powers, truncated by a spectral-radius tail
bound rather than a fixed cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .distributions import ResidualSpec, sample, second_moments
from .errors import ComplexEigenvaluesError, InstabilityError, ValidationError
from .numerics import RandomStream

__all__ = [
    "TransitionMatrix",
    "Var1Model",
    "Trajectory",
    "StabilityCheck",
    "StationaryMoments",
    "eigenvalues",
    "check_stability",
    "phi_power",
    "stationary_moments",
    "acvf_component",
    "ccvf_components",
    "simulate",
]

# below this eigenvalue gap the two-eigenvalue ratio form cancels badly,
# so the power coefficients switch to their divided-difference sums
_EIGEN_GAP = 1e-3


@dataclass(frozen=True)
class TransitionMatrix:
    """Coefficient matrix [[phi11, phi12], [phi21, phi22]]."""

    phi11: float
    phi12: float
    phi21: float
    phi22: float

    @classmethod
    def from_array(cls, a) -> "TransitionMatrix":
        a = np.asarray(a, dtype=float)
        if a.shape != (2, 2):
            raise ValidationError(f"transition matrix must be 2x2, got shape {a.shape}")
        return cls(float(a[0, 0]), float(a[0, 1]), float(a[1, 0]), float(a[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.phi11, self.phi12], [self.phi21, self.phi22]])

    @property
    def discriminant(self) -> float:
        """(phi11 - phi22)^2 + 4 phi21 phi12; negative means complex eigenvalues."""
        return (self.phi11 - self.phi22) ** 2 + 4.0 * self.phi21 * self.phi12

    @classmethod
    def diagonal(cls, phi11: float, phi22: float) -> "TransitionMatrix":
        return cls(phi11, 0.0, 0.0, phi22)


def eigenvalues(phi: TransitionMatrix) -> tuple[float, float]:
    """Real eigenvalues (nu1, nu2) with nu1 <= nu2."""
    disc = phi.discriminant
    if disc < 0.0:
        raise ComplexEigenvaluesError(
            f"eigenvalues are complex (discriminant {disc:g}); only real eigenvalues are supported"
        )
    half_tr = 0.5 * (phi.phi11 + phi.phi22)
    half_gap = 0.5 * math.sqrt(disc)
    return half_tr - half_gap, half_tr + half_gap


class StabilityCheck(NamedTuple):
    stable: bool
    reason: str

    def __bool__(self) -> bool:
        return self.stable


def check_stability(phi: TransitionMatrix) -> StabilityCheck:
    """Both eigenvalues real and strictly inside (-1, 1)?"""
    if phi.discriminant < 0.0:
        return StabilityCheck(False, "complex eigenvalues")
    nu1, nu2 = eigenvalues(phi)
    if max(abs(nu1), abs(nu2)) >= 1.0:
        return StabilityCheck(False, f"eigenvalue outside the unit interval: {nu1:g}, {nu2:g}")
    return StabilityCheck(True, "stable")


def spectral_radius(phi: TransitionMatrix) -> float:
    nu1, nu2 = eigenvalues(phi)
    return max(abs(nu1), abs(nu2))


def _power_coeff(nu1: float, nu2: float, j: int) -> float:
    """(nu2^j - nu1^j) / (nu2 - nu1), evaluated without cancellation.

    For well-separated eigenvalues the ratio is fine; for a small or
    zero gap the equivalent divided-difference sum
    sum_k nu1^k nu2^(j-1-k) is used, whose repeated-eigenvalue limit is
    exactly j nu^(j-1).
    """
    if abs(nu2 - nu1) >= _EIGEN_GAP * max(1.0, abs(nu1), abs(nu2)):
        return (nu2**j - nu1**j) / (nu2 - nu1)
    return float(sum(nu1**k * nu2 ** (j - 1 - k) for k in range(j)))


def phi_power(phi: TransitionMatrix, j: int) -> np.ndarray:
    """Phi^j in closed form from the eigenvalues.

    With b_j = (nu2^j - nu1^j) / (nu2 - nu1):

        Phi^j = -nu1 nu2 b_(j-1) I + b_j Phi

    which covers both the distinct-eigenvalue form and, taking the
    limit b_j -> j nu^(j-1), the repeated-eigenvalue form
    j nu^(j-1) Phi - (j-1) nu^j I.
    """
    if j < 0:
        raise ValidationError(f"matrix power requires j >= 0, got {j}")
    if j == 0:
        return np.eye(2)
    nu1, nu2 = eigenvalues(phi)
    a = -nu1 * nu2 * _power_coeff(nu1, nu2, j - 1)
    b = _power_coeff(nu1, nu2, j)
    return a * np.eye(2) + b * phi.as_array()


@dataclass(frozen=True)
class Trajectory:
    """Simulated or observed component paths of equal length."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x1", np.asarray(self.x1, dtype=float))
        object.__setattr__(self, "x2", np.asarray(self.x2, dtype=float))
        if self.x1.shape != self.x2.shape or self.x1.ndim != 1:
            raise ValidationError("trajectory components must be 1-d arrays of equal length")
        if not (np.isfinite(self.x1).all() and np.isfinite(self.x2).all()):
            raise ValidationError("trajectory contains non-finite values")

    def __len__(self) -> int:
        return self.x1.shape[0]

    @property
    def n(self) -> int:
        return self.x1.shape[0]

    def as_array(self) -> np.ndarray:
        return np.column_stack((self.x1, self.x2))


@dataclass(frozen=True)
class Var1Model:
    """Transition matrix, residual family, and the post-hoc mean shift.

    ``mean_shift`` is the constant added back to component 1 when the
    product series is formed; the recursion itself is always run on the
    demeaned component.
    """

    phi: TransitionMatrix
    residual: ResidualSpec
    mean_shift: float = 0.0

    def require_stable(self) -> None:
        ok = check_stability(self.phi)
        if not ok:
            if ok.reason == "complex eigenvalues":
                raise ComplexEigenvaluesError("transition matrix has complex eigenvalues")
            raise InstabilityError(ok.reason)


class StationaryMoments(NamedTuple):
    sigma_x1_sq: float
    sigma_x2_sq: float
    gamma_x12: float
    rho_x: float


def _series_terms(phi: TransitionMatrix, gamma_z: np.ndarray, h: int, tol: float):
    """Yield terms Phi^(h+j) Gamma_Z (Phi^j)^T until the tail bound is below tol.

    Terms decay like rho^(2j) (times a bounded polynomial for repeated
    eigenvalues), so once maxabs(term) / (1 - rho^2) < tol past a small
    warm-up the remainder is negligible.
    """
    rho = spectral_radius(phi)
    if rho >= 1.0:
        raise InstabilityError("series diverges: spectral radius >= 1")
    p = phi.as_array()
    pj = np.eye(2)
    qj = phi_power(phi, h)
    # 4 / (1 - rho^2)^2 dominates the remainder even with the polynomial
    # factor of a repeated eigenvalue
    tail_scale = 4.0 / (1.0 - rho * rho) ** 2
    j = 0
    if rho > 0.0:
        # well past the point where rho^(2j) underflows the tolerance
        cap = 64 + int(8.0 * abs(math.log(max(tol, 1e-300))) / abs(math.log(rho)))
    else:
        cap = 64
    while True:
        term = qj @ gamma_z @ pj.T
        yield term
        j += 1
        if j >= 8 and np.abs(term).max() * tail_scale < tol:
            return
        if j > cap:
            return
        pj = p @ pj
        qj = p @ qj


def stationary_moments(model: Var1Model, tol: float = 1e-12) -> StationaryMoments:
    """Stationary variances, covariance, and correlation of the components."""
    model.require_stable()
    gamma_z = second_moments(model.residual)
    cov = np.zeros((2, 2))
    for term in _series_terms(model.phi, gamma_z, 0, tol):
        cov += term
    s1, s2 = cov[0, 0], cov[1, 1]
    g12 = 0.5 * (cov[0, 1] + cov[1, 0])
    return StationaryMoments(s1, s2, g12, g12 / math.sqrt(s1 * s2))


def cross_moment_matrix(model: Var1Model, h: int, tol: float = 1e-12) -> np.ndarray:
    """E[x(t+h) x(t)^T] = sum_j Phi^(h+j) Gamma_Z (Phi^j)^T."""
    model.require_stable()
    if h < 0:
        raise ValidationError(f"lag must be non-negative, got {h}")
    gamma_z = second_moments(model.residual)
    out = np.zeros((2, 2))
    for term in _series_terms(model.phi, gamma_z, h, tol):
        out += term
    return out


def acvf_component(model: Var1Model, i: int, h: int, tol: float = 1e-12) -> float:
    """Autocovariance of component i (1 or 2) at lag h >= 0."""
    if i not in (1, 2):
        raise ValidationError(f"component index must be 1 or 2, got {i}")
    m = cross_moment_matrix(model, h, tol)
    return float(m[i - 1, i - 1])


def ccvf_components(model: Var1Model, h: int, tol: float = 1e-12) -> float:
    """Cross-covariance Cov(x1(t), x2(t+h)) at lag h >= 0."""
    m = cross_moment_matrix(model, h, tol)
    return float(m[1, 0])


def simulate(
    model: Var1Model,
    n: int,
    burnin: int = 1000,
    rng: RandomStream | None = None,
    x0: tuple[float, float] = (0.0, 0.0),
    residuals: np.ndarray | None = None,
) -> Trajectory:
    """Simulate n points after `burnin` warm-up steps from x(0) = x0.

    Residual pairs are drawn from the model's family unless an explicit
    (burnin + n, 2) array is supplied, which is the deterministic test
    hook.  Given the same stream the output is bit-identical.
    """
    model.require_stable()
    if n <= 0:
        raise ValidationError(f"n must be positive, got {n}")
    if burnin < 0:
        raise ValidationError(f"burnin must be non-negative, got {burnin}")
    steps = burnin + n
    if residuals is not None:
        z = np.ascontiguousarray(residuals, dtype=float)
        if z.shape != (steps, 2):
            raise ValidationError(f"residuals must have shape ({steps}, 2), got {z.shape}")
    else:
        if rng is None:
            raise ValidationError("simulate needs a RandomStream when residuals are not supplied")
        z = sample(model.residual, steps, rng)
    p = model.phi
    out = kernels.var1_recursion(p.phi11, p.phi12, p.phi21, p.phi22, z, burnin,
                                 float(x0[0]), float(x0[1]))
    return Trajectory(x1=out[:, 0], x2=out[:, 1])
