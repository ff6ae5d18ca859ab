"""Exception types shared across the package."""


class EigencutsError(Exception):
    """Base class for package errors."""


class InvalidMatrixError(EigencutsError, ValueError):
    """Matrix input rejected: non-square, non-finite, or too asymmetric."""


class ConeUnsupportedError(EigencutsError, RuntimeError):
    """Model has second-order-cone rows but the backend is LP-only."""


class NumericalFailureError(EigencutsError, RuntimeError):
    """Solver reported a numerical breakdown."""


class DegenerateComponentError(EigencutsError, RuntimeError):
    """Component extraction hit an all-zero leading eigenvector."""


class ParseError(EigencutsError, ValueError):
    """Instance file rejected; message carries the offending line."""


class GeneratorError(EigencutsError, ValueError):
    """Random-instance generator got infeasible parameters or gave up."""
