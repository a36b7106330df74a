"""Exception hierarchy shared by every chronogen module."""


class ChronogenError(Exception):
    """Base class for all errors raised by chronogen."""


class ValidationError(ChronogenError, ValueError):
    """Input does not satisfy the documented preconditions."""


class CapacityError(ValidationError):
    """A dense object would exceed the configured maximum dimension."""


class SingularOverlapError(ChronogenError, ArithmeticError):
    """The clock state has (numerically) no overlap with the global state.

    The offending parameter value is kept on ``lam`` so callers can report it.
    """

    def __init__(self, lam, overlap=None):
        self.lam = float(lam)
        self.overlap = overlap
        msg = f"singular clock overlap at lambda={self.lam:.17g}"
        if overlap is not None:
            msg += f" (N={overlap:.3e})"
        super().__init__(msg)


class VerificationError(ChronogenError):
    """A computed residual or infidelity exceeded its declared tolerance."""


class ReadoutUnusableError(ChronogenError):
    """The readout curve is not strictly monotone, so it cannot be inverted."""


class ReadoutRangeError(ChronogenError, ValueError):
    """The observed value lies outside the range spanned by the readout curve."""


class ConfigParseError(ChronogenError):
    """The configuration document is malformed."""


class ConfigValidationError(ValidationError):
    """The configuration document is well formed but semantically invalid."""
