"""Exception types raised by the pricing and calibration routines."""


class DegenerateInputs(ValueError):
    """Inputs sit on a boundary (zero time or zero volatility) the caller disallowed."""


class PriceOutOfBounds(ValueError):
    """A quoted price violates its static no-arbitrage bounds."""


class IdenticalStrikes(ValueError):
    """Two quotes share the same strike and kind, so the system has rank one."""


class BracketExhausted(RuntimeError):
    """The root of a monotone scalar equation lies outside the search bracket."""


class CalibrationError(RuntimeError):
    """Base class for failures of the joint two-parameter solve."""

    status = "no_root"


class NoRoot(CalibrationError):
    """The outer equation shows no sign change over the scanned bracket."""

    status = "no_root"


class MultipleRoots(CalibrationError):
    """More than one root was found; all candidates are attached."""

    status = "multiple_roots"

    def __init__(self, message, roots=()):
        super().__init__(message)
        # list of (volatility-like, rate-like) candidate pairs
        self.roots = list(roots)


class InnerFailure(CalibrationError):
    """The conditional (inner) solve failed where it was needed."""

    status = "inner_failure"
