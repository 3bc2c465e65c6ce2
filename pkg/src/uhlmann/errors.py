"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised for malformed parameters, paths or documents."""


class NumericalConsistencyError(RuntimeError):
    """Raised when an internal numerical consistency check fails."""


class IntegratorError(RuntimeError):
    """Raised when step doubling fails to converge.

    The ``history`` attribute holds ``(steps, max_entry_change)`` pairs.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DegenerateSpectrumError(ValueError):
    """Raised when a decomposition-dependent quantity is ambiguous."""
