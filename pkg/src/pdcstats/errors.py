"""Exception types raised across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain of the operation."""


class InsufficientStatisticsError(ValueError):
    """Not enough counts to form the requested quantity."""


class UnreliableMomentError(ValueError):
    """Too much probability sits beyond the truncation for moments to be trusted."""


class HistogramParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class HistogramValidationError(ValueError):
    pass


class ConfigError(ValueError):
    pass
