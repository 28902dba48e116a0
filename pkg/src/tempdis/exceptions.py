class TempdisError(ValueError):
    """Base class for all errors raised by tempdis."""


class SeriesError(TempdisError):
    pass


class ArrearsError(TempdisError):
    pass


class EstimationError(TempdisError):
    pass


class DiagnosticsError(TempdisError):
    pass


class ConfigError(TempdisError):
    pass
