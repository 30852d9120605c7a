"""Exception types shared across the package."""


class BQSError(Exception):
    """Base class for all errors raised by :mod:`bqsim`."""


class InvalidInput(BQSError, ValueError):
    """User-supplied parameters cannot describe a valid state or run."""


class ContractViolation(BQSError, ValueError):
    """An operation was called outside its precondition."""


class ResourceLimit(BQSError, RuntimeError):
    """A size or branch budget was exceeded.

    ``partial`` carries whatever was computed before the limit was hit, or
    ``None`` when nothing useful exists.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UndefinedFidelity(BQSError, ArithmeticError):
    """Fidelity was requested for a herald that never fires."""
