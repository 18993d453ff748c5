"""Exception hierarchy shared by all spoc modules."""


class SpocError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SpocError, ValueError):
    """Input arrays have incompatible shapes."""


class DataFormatError(SpocError, ValueError):
    """A file or in-memory object does not satisfy its format contract."""


class NumericalError(SpocError, ArithmeticError):
    """A numerical routine could not produce a trustworthy answer."""


class EigenSolverError(NumericalError):
    """The eigensolver did not converge or violated its residual contract."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration limit."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class RankDeficiencyError(NumericalError):
    """A matrix that must have full rank K does not."""


class SingularFactorError(NumericalError):
    """The Gram matrix of the selected pure-node rows is (numerically) singular."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value
