"""Exception hierarchy shared by every module of the package."""


class SirError(ValueError):
    """Base class for all package errors."""


class NonPositiveRate(SirError):
    pass


class NegativeRate(SirError):
    pass


class ZeroSigma1(SirError):
    pass


class SigmaTwoZero(SirError):
    pass


class DomainError(SirError):
    pass


class ConfigError(SirError):
    pass


class NonFiniteState(SirError):
    """Raised when a simulated coordinate overflows.

    The offending step index is kept on ``step`` for diagnostics.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class InsufficientData(SirError):
    pass


class EmptyInput(SirError):
    pass


class ShapeMismatch(SirError):
    pass


class ParseError(SirError):
    """Config-file problem; ``line`` and ``key`` locate it when known."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.key = key
