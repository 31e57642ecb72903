"""Exception types shared across the package."""

from __future__ import annotations


class FloodgateError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FloodgateError):
    """A scenario or detector configuration is invalid.

    Carries one message per violated field so callers can report all
    problems at once instead of failing on the first.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


class EngineStateError(FloodgateError):
    """The simulation engine reached an inconsistent internal state."""


class TraceIntegrityError(FloodgateError):
    """An event trace is malformed (out of order or incomplete lifecycles)."""


class UnstableSystemError(ValueError):
    """Closed-form request for a system with no steady state (lambda >= mu)."""


class CalibrationError(FloodgateError):
    """Calibration target unreachable within the configured rate bounds."""

    def __init__(self, message: str, lo_loss: float | None = None,
                 hi_loss: float | None = None):
        super().__init__(message)
        self.lo_loss = lo_loss
        self.hi_loss = hi_loss
