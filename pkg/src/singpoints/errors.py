"""Exception hierarchy shared by all modules."""


class SingPointsError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SingPointsError, ValueError):
    pass


class DomainError(SingPointsError, ValueError):
    pass


class SolverError(SingPointsError, RuntimeError):
    pass


class DegeneratePencilError(SolverError):
    """Both matrices of a pencil share a null direction: det(zB - A) vanishes identically."""


class SingularMatrixError(SingPointsError, ValueError):
    """Raised where an inverse is required but the matrix is numerically singular.

    Callers that draw matrices at random are expected to resample.
    """


class KernelError(SingPointsError, ArithmeticError):
    """A Gram matrix came out significantly non-PSD: the kernel implementation is wrong."""
