"""Exception hierarchy. Each family maps to one CLI exit code."""


class LifetimeError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DomainError(LifetimeError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class InfeasibleCycleError(DomainError):
    """Non-idle state fractions add up to more than one activation cycle."""


class ConfigError(LifetimeError):
    """Invalid run configuration. ``field`` is a dotted path into the config."""

    exit_code = 2

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class TraceError(LifetimeError, ValueError):
    exit_code = 3


class TraceParseError(TraceError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class SequencingError(TraceParseError):
    """Sample times are not strictly increasing."""


class EmptyTraceError(TraceError):
    pass


class MissingLabelError(TraceError):
    pass


class InsufficientTraceError(TraceError):
    """Trace is shorter than one measurement cycle of the traffic model."""


class NumericError(LifetimeError, ArithmeticError):
    exit_code = 4


class ConvergenceError(NumericError):
    pass


class BracketError(NumericError):
    """Root-finding bracket holds no sign change."""
