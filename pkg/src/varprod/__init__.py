"""Product of bi-dimensional VAR(1) components.

Library and CLI for the time series y(t) = x1(t) x2(t) built from a
two-dimensional first-order vector autoregression: closed-form and
general product autocovariances, simulation with Gaussian or Student's t
residual pairs, Monte Carlo confidence bands, and the estimation and
diagnostic pipeline used for price-times-forecast-error cost analysis.
"""

from .distributions import Family, MomentSet, ResidualSpec
from .errors import VarprodError
from .estimators import ConfidenceBand
from .kernels import BACKEND
from .numerics import RandomStream, substream
from .product_acvf import AcvfCurve, CaseTag
from .var1 import TransitionMatrix, Trajectory, Var1Model

__version__ = "0.1.0"

__all__ = [
    "AcvfCurve",
    "BACKEND",
    "CaseTag",
    "ConfidenceBand",
    "Family",
    "MomentSet",
    "RandomStream",
    "ResidualSpec",
    "Trajectory",
    "TransitionMatrix",
    "Var1Model",
    "VarprodError",
    "substream",
    "__version__",
]
