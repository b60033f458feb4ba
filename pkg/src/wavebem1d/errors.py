"""Exception types shared across the package."""

import numpy as np


class PreconditionError(ValueError):
    """Input data violates a documented precondition (e.g. g(0) != 0)."""


class OutOfDomainError(ValueError):
    """Evaluation requested beyond the terminal time T."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Matrix is singular to working precision."""


class ModeTruncationWarning(UserWarning):
    """Too few sine modes to resolve the discrete space."""
