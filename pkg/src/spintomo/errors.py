"""Exception types raised by the package."""


class SpinTomoError(ValueError):
    """Base class for every error raised on invalid input."""


class DimensionMismatch(SpinTomoError):
    pass


class NotHermitian(SpinTomoError):
    pass


class NonFiniteInput(SpinTomoError):
    pass


class ConvergenceError(SpinTomoError):
    """Jacobi sweeps did not reduce the off-diagonal mass below tolerance."""


class LengthExceedsOne(SpinTomoError):
    pass


class NotPure(SpinTomoError):
    pass


class CoplanarTriple(SpinTomoError):
    pass


class FourthVectorTooLong(SpinTomoError):
    pass


class DegenerateFold(SpinTomoError):
    pass


class ExhaustedAttempts(SpinTomoError):
    pass


class InvalidQuadruple(SpinTomoError):
    """Raised when a quadruple fails validation; carries the report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CoplanarQuadruple(InvalidQuadruple):
    pass


class SingularTransferMatrix(SpinTomoError):
    pass


class NonPhysicalState(SpinTomoError):
    pass


class MaterializeLimitExceeded(SpinTomoError):
    pass


class IndexOutOfRange(SpinTomoError, IndexError):
    pass


class SchemaVersionMismatch(SpinTomoError):
    pass


class ValidationFailure(SpinTomoError):
    """A serialized document failed schema or consistency checks."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class UnknownPreset(SpinTomoError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""
