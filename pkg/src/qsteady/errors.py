"""Exception hierarchy shared by all qsteady modules.

The CLI maps these onto exit codes: configuration problems -> 2,
data problems -> 3, numeric failures -> 4, estimation abort -> 5.
"""


class QSteadyError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(QSteadyError, ValueError):
    """An argument is outside its documented domain."""


class UnsupportedOperationError(QSteadyError):
    """The operation is not defined for this model regime or input kind."""


class NumericError(QSteadyError):
    """A numerical procedure failed to converge.

    Carries the last residual / error estimate in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DataError(QSteadyError, ValueError):
    """Observed data violates a structural requirement (bad CSV row, count
    above the degree cap, ...)."""


class InsufficientDataError(DataError):
    """Not enough observations to produce the requested estimate."""


class ConfigError(QSteadyError, ValueError):
    """A scenario configuration file or CLI flag combination is invalid."""


class ProcedureAbortError(QSteadyError):
    """Every sampled node failed the renewal-estimation diagnostics.

    ``abort_log`` maps node id -> abort reason.
    """

    def __init__(self, message, abort_log=None):
        super().__init__(message)
        self.abort_log = dict(abort_log or {})
