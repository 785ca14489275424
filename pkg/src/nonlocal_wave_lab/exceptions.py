"""Exception hierarchy used across the package."""


class NonlocalWaveError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NonlocalWaveError, ValueError):
    """Invalid input parameters, rejected before any computation starts."""


class GridMismatchError(ValidationError):
    """Two grid-bound objects live on different grids."""


class ModelError(ValidationError):
    """A (L, B, p, sigma) combination violates an admissibility rule."""


class InadmissibleVelocityError(ValidationError):
    """The wave velocity lies outside the admissible range of the regime."""


class StepSizeError(ValidationError):
    """Time step exceeds the stability bound of the nonlinear term."""


class NumericalError(NonlocalWaveError, RuntimeError):
    """A numerical procedure failed after valid inputs were accepted."""


class ConvergenceError(NumericalError):
    """An iterative solver did not converge within its budget."""


class NotConvergedWaveError(NumericalError):
    """A wave profile is not converged enough for the requested quantity."""
