"""Exception hierarchy shared by the library and the CLI."""


class TwoElectronError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TwoElectronError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class NumericError(TwoElectronError, ArithmeticError):
    """A closed-form expression hit an exact singularity."""


class ResonanceError(NumericError):
    """The Lippmann-Schwinger denominator ``1 - g K`` vanished."""


class ConvergenceError(TwoElectronError, RuntimeError):
    """A numerical limit did not converge to the requested tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    trace : list
        Whatever sequence of intermediate values the failing routine produced
        (e.g. ``(eta, value)`` pairs), kept for diagnostics.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ConfigError(TwoElectronError, ValueError):
    """Invalid run configuration; carries field-level diagnostics."""

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = dict(fields or {})
