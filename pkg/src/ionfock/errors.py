"""Exception hierarchy shared by every module.

The CLI maps :class:`ConfigError` to exit status 1 and the numerical
failures (:class:`NumericalError` subclasses) to exit status 2.
"""


class IonFockError(Exception):
    """Base class for all package errors."""


class ConfigError(IonFockError, ValueError):
    """Invalid or inconsistent configuration."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DomainError(IonFockError, ValueError):
    """Argument outside the domain of an operation."""


class CapacityError(IonFockError, MemoryError):
    """Basis dimension above the configured cap."""


class NumericalError(IonFockError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class ConvergenceError(NumericalError):
    """Iterative solver hit its iteration cap."""


class TruncationError(NumericalError):
    """Phonon-space truncation too small for the requested accuracy."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed."""


class AccuracyError(NumericalError):
    """Norm drift above the accepted bound."""


class TrackingError(NumericalError):
    """Lost continuity while following an adiabatic eigenstate."""


class ProtocolAbort(NumericalError):
    """A protocol step fell below its fidelity floor."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
