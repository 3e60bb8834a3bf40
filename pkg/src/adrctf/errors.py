"""Exception types raised by the design, analysis and simulation routines."""


class AdrcError(ValueError):
    """Base class for all adrctf errors."""


class ConfigError(AdrcError):
    """Invalid user-supplied parameters (order, bandwidth, sample time, ...)."""


class DesignError(AdrcError):
    """A controller design cannot be completed for the given parameters."""


class AnalysisError(AdrcError):
    """A frequency-domain analysis is degenerate."""


class InvalidOrderError(ConfigError):
    pass


class InvalidBandwidthError(ConfigError):
    pass


class InvalidSampleTimeError(ConfigError):
    pass


class DimensionMismatchError(ConfigError):
    pass


class UnsupportedOrderError(DesignError):
    pass


class DegenerateGainsError(DesignError):
    pass


class NormalizationError(DesignError):
    pass


class IllConditionedError(DesignError):
    pass


class NoIntegratorError(DesignError):
    """The feedback denominator has no root at z = 1 (or s = 0)."""


class DegenerateB0Error(DesignError):
    pass


class NonFiniteInputError(AdrcError):
    """A controller received NaN or inf; its state was left untouched."""


class PoleHitError(AnalysisError):
    pass


class AlgebraicDegeneracyError(AnalysisError):
    pass


class WrongRelativeDegreeError(AnalysisError):
    pass


class ImproperTfError(AnalysisError):
    pass


class ZohOverflowError(AnalysisError):
    pass


class NoStepFoundError(AnalysisError):
    pass
