"""Shared builders for the test suite."""

import math

import numpy as np
import pytest

from varprod.distributions import ResidualSpec
from varprod.var1 import TransitionMatrix, Var1Model

SIGMA_SQ = 5.0 / 3.0  # marginal variance matching a unit-scale t with eta = 5
SIGMA = math.sqrt(SIGMA_SQ)


def simulation_study_models():
    """The six (case x distribution) configurations of the simulation study."""
    diag = TransitionMatrix.diagonal(0.8, 0.8)
    tri = TransitionMatrix(0.0, 0.8, 0.0, 0.8)
    return [
        ("case1-gaussian", Var1Model(diag, ResidualSpec.gaussian(SIGMA, SIGMA))),
        ("case1-t", Var1Model(diag, ResidualSpec.independent_t(5.0, 5.0))),
        ("case2-gaussian", Var1Model(diag, ResidualSpec.gaussian(SIGMA, SIGMA, 0.8))),
        ("case2-t", Var1Model(diag, ResidualSpec.bivariate_t(eta=5.0, rho=0.8))),
        ("case3-gaussian", Var1Model(tri, ResidualSpec.gaussian(SIGMA, SIGMA))),
        ("case3-t", Var1Model(tri, ResidualSpec.independent_t(5.0, 5.0))),
    ]


def random_stable_matrix(gen: np.random.Generator, min_gap: float = 1e-6) -> TransitionMatrix:
    """Rejection-sample a stable matrix with real, separated eigenvalues."""
    while True:
        m = TransitionMatrix(*gen.uniform(-0.95, 0.95, size=4))
        if m.discriminant <= min_gap:
            continue
        tr = 0.5 * (m.phi11 + m.phi22)
        gap = 0.5 * math.sqrt(m.discriminant)
        if max(abs(tr - gap), abs(tr + gap)) < 0.98:
            return m


def random_repeated_matrix(gen: np.random.Generator) -> TransitionMatrix:
    """Triangular matrix with one repeated eigenvalue."""
    nu = gen.uniform(-0.95, 0.95)
    if gen.random() < 0.5:
        return TransitionMatrix(nu, gen.uniform(-1.0, 1.0), 0.0, nu)
    return TransitionMatrix(nu, 0.0, gen.uniform(-1.0, 1.0), nu)


def iterated_power(arr: np.ndarray, j: int) -> np.ndarray:
    out = np.eye(2)
    for _ in range(j):
        out = out @ arr
    return out


@pytest.fixture
def np_gen():
    return np.random.default_rng(20240605)
