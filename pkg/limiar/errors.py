"""Exception hierarchy for limiar.

Every error raised on purpose by the package derives from :class:`LimiarError`
so callers (and the CLI) can map failures to exit codes:

- :class:`ConfigError` -- the configuration document is unusable (exit 2).
- :class:`PreconditionError` -- a mathematical precondition of an operation
  does not hold, e.g. a subcritical configuration (exit 3).
- :class:`QuadratureFailure` -- numerical integration did not converge (exit 1).

:class:`PreconditionWarning` is the non-fatal counterpart used where the
operation can still return a (flagged) result.
"""


class LimiarError(Exception):
    """Base class of all errors raised by limiar."""


class ConfigError(LimiarError, ValueError):
    """Raised when a configuration document cannot be parsed or resolved."""


class PreconditionError(LimiarError, ValueError):
    """Raised when the inputs violate an operation's precondition."""


class ZeroTotalDegree(PreconditionError):
    """The configuration has no half-edges at all."""


class NoSusceptibles(PreconditionError):
    """The configuration has no susceptible vertices."""


class Subcritical(PreconditionError):
    """The criticality measure alpha is not positive."""


class DegenerateMoments(PreconditionError):
    """lambda_2 or lambda_3 vanishes, so the limit constants are undefined."""


class RegimeMismatch(PreconditionError):
    """The requested prediction is only defined in another nu regime."""


class OddTotalDegree(PreconditionError):
    """The half-edges cannot be perfectly matched."""


class NotGraphical(PreconditionError):
    """No simple graph realises the degree sequence."""


class AttemptsExhausted(PreconditionError):
    """Rejection sampling of a simple graph gave up."""


class SpecMismatch(PreconditionError):
    """Per-degree state counts do not fit the realised degrees."""


class UnsupportedInitialRecovered(PreconditionError):
    """The operation is only defined without initially recovered vertices."""


class TargetUnreachable(PreconditionError):
    """No integer seed count gets close enough to the requested target."""


class NoLargeOutbreaks(PreconditionError):
    """A statistic over large outbreaks was requested but none occurred."""


class QuadratureFailure(LimiarError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class PreconditionWarning(UserWarning):
    """Non-fatal warning: the preconditions of a limit law look violated."""
