"""Exception hierarchy shared across the package."""


class PowerAlertError(Exception):
    """Base class for all package errors."""


class InvalidModulusError(PowerAlertError, ValueError):
    pass


class InvalidInputError(PowerAlertError, ValueError):
    pass


class InvalidCoverageError(PowerAlertError, ValueError):
    pass


class ExecutionFault(PowerAlertError):
    """An IC-program touched memory outside the image bounds."""


class FormatError(PowerAlertError, ValueError):
    """Malformed binary or text input.

    ``offset`` is the byte offset where decoding failed, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class BadMagicError(FormatError):
    pass


class BadVersionError(FormatError):
    pass


class TruncatedError(FormatError):
    pass


class IntegrityError(FormatError):
    """CRC mismatch."""


class NotIrreducibleError(FormatError):
    pass


class FitError(PowerAlertError, ValueError):
    pass


class LearningFailure(PowerAlertError):
    pass


class InfeasibleError(PowerAlertError):
    """Raised when no parameter choice satisfies the named constraint."""

    def __init__(self, constraint, message=""):
        super().__init__(f"infeasible: {constraint}" + (f" ({message})" if message else ""))
        self.constraint = constraint


class ProtocolError(PowerAlertError):
    pass
