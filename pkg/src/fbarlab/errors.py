"""Exception types shared across the package.

The CLI maps :class:`PreconditionError` subclasses to exit code 2 and
:class:`NumericFailure` subclasses to exit code 3.
"""


class FbarLabError(Exception):
    pass


class PreconditionError(FbarLabError):
    pass


class InvalidInputError(PreconditionError, ValueError):
    pass


class NoFeasibleEtaError(PreconditionError):
    def __init__(self, message, scanned=None):
        super().__init__(message)
        self.scanned = scanned


class PreconditionFailed(PreconditionError):
    """A mathematical hypothesis of a construction does not hold."""


class InvalidRoofError(PreconditionError):
    def __init__(self, message, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class NumericFailure(FbarLabError, ArithmeticError):
    pass


class NearResonanceError(NumericFailure):
    def __init__(self, message, k=None, modulus=None):
        super().__init__(message)
        self.k = k
        self.modulus = modulus


class CapExceededError(NumericFailure):
    pass
