"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: validation problems exit with 2,
numeric/convergence problems with 3, I/O problems with 4.
"""


class VarprodError(Exception):
    """Base class for all package errors."""


class ValidationError(VarprodError, ValueError):
    """Bad inputs or parameters (CLI exit code 2)."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of a function."""


class InvalidSpecError(ValidationError):
    """Residual-distribution specification violates its invariants."""


class ComplexEigenvaluesError(ValidationError):
    """Transition matrix has complex eigenvalues (unsupported regime)."""


class InstabilityError(ValidationError):
    """Transition matrix eigenvalues are not strictly inside (-1, 1)."""


class HeavyTailError(ValidationError):
    """Requested moments do not exist for the given degrees of freedom."""


class DegenerateDataError(ValidationError):
    """Sample has zero variance or is otherwise degenerate."""


class InsufficientDataError(ValidationError):
    """Sample too short for the requested operation."""


class NumericError(VarprodError, ArithmeticError):
    """Numeric failure (CLI exit code 3)."""


class SingularMomentError(NumericError):
    """Sample moment matrix is singular or ill-conditioned."""


class ConvergenceError(NumericError):
    """Iterative routine hit its cap; carries the best result found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IOFailure(VarprodError):
    """File-level problem (CLI exit code 4)."""


class ParseError(IOFailure):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
