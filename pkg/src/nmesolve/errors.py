"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`NMEError`,
so callers (and the CLI) can separate anticipated failures from bugs.
"""


class NMEError(Exception):
    """Base class for all anticipated errors."""


class InvalidInput(NMEError, ValueError):
    pass


class NotSquare(InvalidInput):
    pass


class NotHermitian(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class FieldMismatch(InvalidInput):
    pass


class InvalidOperator(InvalidInput):
    pass


class NotPositiveDefinite(NMEError):
    pass


class SingularIntermediate(NMEError):
    pass


class SingularOperand(NMEError):
    pass


class NoConvergence(NMEError):
    pass


class NotSolvable(NMEError):
    pass


class Breakdown(NMEError):
    """A pivot matrix lost positive definiteness during a triple update.

    ``index`` is the effective index that was being formed, when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InsufficientHistory(NMEError):
    pass


class RetryExhausted(NMEError):
    pass


class ProblemFileError(InvalidInput):
    """Malformed problem file; ``location`` names the offending place."""

    def __init__(self, message, location=None):
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location
