"""Exception and warning types shared across the package."""


class LambertCreepError(Exception):
    """Base class for all package errors."""


class DomainError(LambertCreepError, ValueError):
    """Argument outside the domain of the requested function."""


class CutError(DomainError):
    """Complex argument lies exactly on the branch cut (-inf, -1/e]."""


class ConvergenceError(LambertCreepError, RuntimeError):
    """Iterative solver did not reach its tolerance within max_iter."""


class CutEvaluationError(LambertCreepError):
    """A transform could not be evaluated on the negative real axis."""


class MethodDomainError(LambertCreepError, ValueError):
    """Inversion method incompatible with the transform's evaluation domain."""


class GridError(LambertCreepError, ValueError):
    """Grid is malformed: not strictly increasing or not uniform."""


class GridTooCoarse(GridError):
    """Grid has too few points for the requested difference order."""


class NumericalWarning(UserWarning):
    """Base class for accuracy warnings."""


class ToleranceNotMet(NumericalWarning):
    """Quadrature returned its best value without meeting the tolerances."""


class InversionInstability(NumericalWarning):
    """Successive inverse-Laplace approximations disagree."""


class StepTooCoarse(NumericalWarning):
    """Halving the Volterra step changed the solution beyond tolerance."""
