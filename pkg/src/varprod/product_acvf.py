"""Mean and autocovariance of the product y(t) = x1(t) x2(t).

Three dependence regimes have closed forms:

* case 1 - decoupled: off-diagonal coefficients zero, independent
  residual components;
* case 2 - residual-coupled: off-diagonal coefficients zero, dependence
  only through the residual pair;
* case 3 - coefficient-coupled: phi21 = 0, phi12 != 0, independent
  residual components (closed forms specialize to phi11 = 0).

Everything else (and every mixed regime) is handled by the general
evaluator, which expands E[y(t) y(t+h)] over the ways the four residual
time indices can coincide: all four equal contributes the fourth-moment
tensor, the three pairwise matchings contribute products of second
moments, and everything else vanishes because the residuals are
independent over time with zero mean.  This collapses the formally
four-fold infinite sum into single geometric-type series.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distributions import MomentSet, moments, second_moments
from .errors import InstabilityError, ValidationError
from .var1 import (
    Trajectory,
    Var1Model,
    acvf_component,
    phi_power,
    spectral_radius,
    stationary_moments,
)

__all__ = [
    "CaseTag",
    "AcvfCurve",
    "product_series",
    "classify_case",
    "mean_product",
    "acvf_case1",
    "acvf_case2",
    "acvf_case3",
    "acvf_case1_meanshift",
    "acvf_general_numeric",
    "theoretical_curve",
]


class CaseTag(enum.Enum):
    CASE1 = "case1"
    CASE2 = "case2"
    CASE3 = "case3"
    GENERAL = "general"
    CASE1_MEANSHIFT = "case1_meanshift"


@dataclass(frozen=True)
class AcvfCurve:
    """Lag-indexed autocovariance values, theoretical or empirical."""

    lags: np.ndarray
    values: np.ndarray
    case_tag: CaseTag | None = None

    def __post_init__(self):
        object.__setattr__(self, "lags", np.asarray(self.lags, dtype=int))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.lags.shape != self.values.shape or self.lags.ndim != 1:
            raise ValidationError("lags and values must be 1-d arrays of equal length")

    def __len__(self) -> int:
        return self.lags.shape[0]


def product_series(traj: Trajectory, mean_shift: float = 0.0) -> np.ndarray:
    """y(t) = (x1(t) + mean_shift) * x2(t)."""
    return (traj.x1 + mean_shift) * traj.x2


def classify_case(model: Var1Model) -> CaseTag:
    """Most specific dependence regime matching the model."""
    p = model.phi
    off_diag_zero = p.phi12 == 0.0 and p.phi21 == 0.0
    indep = model.residual.independent_components
    if off_diag_zero and indep:
        return CaseTag.CASE1
    if off_diag_zero:
        return CaseTag.CASE2
    if p.phi21 == 0.0 and p.phi12 != 0.0 and indep:
        return CaseTag.CASE3
    return CaseTag.GENERAL


def _require_contraction(*phis: float) -> None:
    for v in phis:
        if not abs(v) < 1.0:
            raise InstabilityError(f"coefficient {v!r} is not inside (-1, 1)")


def mean_product(model: Var1Model) -> float:
    """E[y(t)], the stationary covariance of the two components.

    The mean shift never enters: E[(x1 + mu) x2] = E[x1 x2] because the
    second component has zero mean.
    """
    model.require_stable()
    tag = classify_case(model)
    p = model.phi
    if tag is CaseTag.CASE1:
        return 0.0
    gz = second_moments(model.residual)
    if tag is CaseTag.CASE2:
        return float(gz[0, 1] / (1.0 - p.phi11 * p.phi22))
    if tag is CaseTag.CASE3:
        s2sq = gz[1, 1]
        if abs(p.phi11 - p.phi22) < 1e-12:
            return float(s2sq * p.phi22 * p.phi12 / (1.0 - p.phi11 * p.phi22) ** 2)
        return float(
            s2sq * p.phi12 / (p.phi22 - p.phi11)
            * (p.phi22**2 / (1.0 - p.phi22**2) - p.phi11 * p.phi22 / (1.0 - p.phi22 * p.phi11))
        )
    return stationary_moments(model).gamma_x12


def acvf_case1(phi11: float, phi22: float, sigma1_sq: float, sigma2_sq: float, h: int) -> float:
    """Decoupled case: sigma1^2 sigma2^2 (phi11 phi22)^h / ((1-phi11^2)(1-phi22^2))."""
    _require_contraction(phi11, phi22)
    if h < 0:
        raise ValidationError(f"lag must be non-negative, got {h}")
    return (
        sigma1_sq * sigma2_sq * (phi11 * phi22) ** h
        / ((1.0 - phi11**2) * (1.0 - phi22**2))
    )


def acvf_case2(phi11: float, phi22: float, mom: MomentSet, h: int) -> float:
    """Residual-coupled case.

    (phi11 phi22)^h [ (m_z - s1 s2 - 2 c12^2) / (1 - (phi11 phi22)^2)
                      + s1 s2 / ((1 - phi11^2)(1 - phi22^2))
                      + c12^2 / (1 - phi11 phi22)^2 ]

    with s_i the residual variances and c12 their covariance.  Plugging
    Gaussian moments (m_z = s1 s2 + 2 c12^2) cancels the first bracket
    term exactly.
    """
    _require_contraction(phi11, phi22)
    if h < 0:
        raise ValidationError(f"lag must be non-negative, got {h}")
    s1s2 = mom.gamma_z[0, 0] * mom.gamma_z[1, 1]
    c12_sq = mom.gamma_z[0, 1] ** 2
    pp = phi11 * phi22
    return pp**h * (
        (mom.m_z - s1s2 - 2.0 * c12_sq) / (1.0 - pp * pp)
        + s1s2 / ((1.0 - phi11**2) * (1.0 - phi22**2))
        + c12_sq / (1.0 - pp) ** 2
    )


def acvf_case3(phi12: float, phi22: float, mom: MomentSet, h: int) -> float:
    """Coefficient-coupled case with phi11 = 0 and phi21 = 0.

    With v_i the residual variances and kappa = E[Z2^4]:

        h = 0:  phi12^2 [ phi22^2 (kappa - 3 v2^2) / (1 - phi22^4)
                          + (1 + phi22^2) v2^2 / (1 - phi22^2)^2 ]
                + v1 v2 / (1 - phi22^2)

        h > 0:  phi12^2 phi22^(2h) [ phi22^2 (kappa - 3 v2^2) / (1 - phi22^4)
                                     + 2 v2^2 / (1 - phi22^2)^2 ]

    Gaussian moments (kappa = 3 v2^2) kill the first bracket term.  The
    value depends on the coefficients only through phi12^2 and
    phi22^(2h), so their signs never matter.
    """
    _require_contraction(phi22)
    if h < 0:
        raise ValidationError(f"lag must be non-negative, got {h}")
    s1sq = mom.gamma_z[0, 0]
    s2sq = mom.gamma_z[1, 1]
    kappa = mom.kappa_z
    p2sq = phi22 * phi22
    excess = p2sq * (kappa - 3.0 * s2sq * s2sq) / (1.0 - p2sq * p2sq)
    if h == 0:
        return (
            phi12**2 * (excess + (1.0 + p2sq) * s2sq * s2sq / (1.0 - p2sq) ** 2)
            + s1sq * s2sq / (1.0 - p2sq)
        )
    return phi12**2 * p2sq**h * (excess + 2.0 * s2sq * s2sq / (1.0 - p2sq) ** 2)


def acvf_case1_meanshift(phi11: float, phi22: float, sigma1_sq: float, sigma2_sq: float,
                         mu_x: float, h: int) -> float:
    """Decoupled case for y(t) = (x1(t) + mu_x) x2(t).

    The shift adds mu_x^2 times the autocovariance of the second
    component: mu_x^2 phi22^h sigma2^2 / (1 - phi22^2).
    """
    base = acvf_case1(phi11, phi22, sigma1_sq, sigma2_sq, h)
    return base + mu_x**2 * phi22**h * sigma2_sq / (1.0 - phi22**2)


def acvf_general_numeric(model: Var1Model, h: int, tol: float = 1e-10) -> float:
    """Product autocovariance at lag h by pairing the residual time indices.

    With P = Phi^j and Q = Phi^(j+h), the contributions are

        all four indices equal:  sum_j  P_1. (x) P_2. (x) Q_1. (x) Q_2. : M4
        pairings, minus their index-collision diagonals:
            ACVF_x1(h) ACVF_x2(h) - sum_j (P_1. G Q_1.)(P_2. G Q_2.)
            CCVF_12(h) CCVF_21(h) - sum_j (P_1. G Q_2.)(P_2. G Q_1.)
            - sum_j (P_1. G P_2.)(Q_1. G Q_2.)

    where G is the residual covariance and M4 the fourth-moment tensor;
    the subtracted mean-product square cancels against the same-time
    pairing of the component covariance, so it never appears explicitly.
    Applies to the plain product (no mean shift).
    """
    model.require_stable()
    if h < 0:
        raise ValidationError(f"lag must be non-negative, got {h}")
    mom = moments(model.residual)  # HeavyTailError when fourth moments diverge
    g = mom.gamma_z
    m4 = mom.m4
    phi = model.phi
    p = phi.as_array()
    rho = spectral_radius(phi)
    tail = 4.0 / (1.0 - rho * rho) ** 2

    sum_quartic = 0.0  # all-equal M4 part minus the three pairing diagonals
    s_a1 = s_a2 = s_c12 = s_c21 = 0.0  # running component ACVF / CCVF sums
    pj = np.eye(2)
    qj = phi_power(phi, h)
    if rho > 0.0:
        cap = 64 + int(8.0 * abs(math.log(max(tol, 1e-300))) / abs(math.log(rho)))
    else:
        cap = 64
    j = 0
    while True:
        a1 = pj[0] @ g @ qj[0]
        a2 = pj[1] @ g @ qj[1]
        c12 = pj[0] @ g @ qj[1]
        c21 = pj[1] @ g @ qj[0]
        gj = pj[0] @ g @ pj[1]
        gjh = qj[0] @ g @ qj[1]
        quart = (
            np.einsum("k,l,n,r,klnr->", pj[0], pj[1], qj[0], qj[1], m4)
            - gj * gjh - a1 * a2 - c12 * c21
        )
        sum_quartic += quart
        s_a1 += a1
        s_a2 += a2
        s_c12 += c12
        s_c21 += c21
        j += 1
        lin_inc = max(abs(a1), abs(a2), abs(c12), abs(c21))
        lin_scale = max(abs(s_a1), abs(s_a2), abs(s_c12), abs(s_c21), 1.0)
        if j >= 8 and (abs(quart) + lin_inc * lin_scale) * tail < tol:
            break
        if j > cap:
            break
        pj = p @ pj
        qj = p @ qj
    return float(sum_quartic + s_a1 * s_a2 + s_c12 * s_c21)


def theoretical_curve(model: Var1Model, hmax: int, mode: str = "auto",
                      tol: float = 1e-10) -> AcvfCurve:
    """Theoretical product autocovariances at lags 0..hmax.

    ``mode="closed"`` uses the matching closed form and fails when the
    model fits none; ``mode="numeric"`` always uses the general
    evaluator; ``mode="auto"`` prefers the closed form.

    A mean shift on component 1 adds mean_shift^2 times the second
    component's own autocovariance at every lag: the cross terms it
    would otherwise introduce carry third moments of the residual pair,
    and every supported family is centrally symmetric, so they vanish.
    In the decoupled case this is exactly the shifted closed form.
    """
    if mode not in ("auto", "closed", "numeric"):
        raise ValidationError(f"mode must be auto, closed, or numeric, got {mode!r}")
    if hmax < 0:
        raise ValidationError(f"hmax must be non-negative, got {hmax}")
    model.require_stable()
    tag = classify_case(model)
    p = model.phi
    lags = np.arange(hmax + 1)

    use_closed = mode != "numeric" and tag in (CaseTag.CASE1, CaseTag.CASE2, CaseTag.CASE3)
    if tag is CaseTag.CASE3 and p.phi11 != 0.0:
        use_closed = False  # closed form is the phi11 = 0 specialization
    if mode == "closed" and not use_closed:
        raise ValidationError(f"no closed form applies to this model (classified {tag.value})")

    if model.mean_shift != 0.0 and tag is CaseTag.CASE1 and use_closed:
        gz = second_moments(model.residual)
        vals = [
            acvf_case1_meanshift(p.phi11, p.phi22, gz[0, 0], gz[1, 1], model.mean_shift, h)
            for h in lags
        ]
        return AcvfCurve(lags, vals, CaseTag.CASE1_MEANSHIFT)

    if not use_closed:
        vals = np.array([acvf_general_numeric(model, int(h), tol) for h in lags])
        out_tag = CaseTag.GENERAL
    elif tag is CaseTag.CASE1:
        gz = second_moments(model.residual)
        vals = np.array([acvf_case1(p.phi11, p.phi22, gz[0, 0], gz[1, 1], h) for h in lags])
        out_tag = tag
    elif tag is CaseTag.CASE2:
        mom = moments(model.residual)
        vals = np.array([acvf_case2(p.phi11, p.phi22, mom, h) for h in lags])
        out_tag = tag
    else:
        mom = moments(model.residual)
        vals = np.array([acvf_case3(p.phi12, p.phi22, mom, h) for h in lags])
        out_tag = tag

    if model.mean_shift != 0.0:
        shift_sq = model.mean_shift**2
        vals = vals + shift_sq * np.array(
            [acvf_component(model, 2, int(h)) for h in lags]
        )
        if out_tag is CaseTag.CASE1:
            out_tag = CaseTag.CASE1_MEANSHIFT
    return AcvfCurve(lags, vals, out_tag)
