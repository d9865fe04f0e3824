"""Exception hierarchy shared across the package.

Three branches matter to callers (and to the CLI exit-code mapping):
``ValidationError`` for bad inputs, ``NumericalError`` for conditions
detected during computation, and ``BudgetExceededError`` for enumeration
requests beyond the configured size limits.
"""


class WishmomError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WishmomError):
    """Invalid input: shape, type, or invariant violation."""


class NotHermitianError(ValidationError):
    """Matrix required to be Hermitian is not, within tolerance."""


class DimensionMismatchError(ValidationError):
    """Operands have incompatible dimensions."""


class NonIntegerNError(ValidationError):
    """Sampling requires an integer number of degrees of freedom."""


class DegenerateSampleSizeError(ValidationError):
    """Estimator denominator vanishes for this sample size."""


class InsufficientOrdersError(ValidationError):
    """A moment/cumulant sequence is too short for the requested order."""


class NumericalError(WishmomError):
    """Numerical failure detected while computing."""


class SingularMatrixError(NumericalError):
    """A pivot underflowed tolerance; the matrix is numerically singular."""


class NotPSDError(NumericalError):
    """Matrix required to be positive semidefinite is not."""


class NoConvergenceError(NumericalError):
    """Iteration exhausted its sweep budget without converging."""


class BudgetExceededError(WishmomError):
    """Requested enumeration exceeds the configured budget."""
