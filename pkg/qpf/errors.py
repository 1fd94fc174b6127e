"""Exception hierarchy shared by every qpf module."""

from datetime import datetime, timezone


class QpfError(Exception):
    """Base exception for all qpf errors."""

    def __init__(self, message: str, code: str | None = None, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.code = code or self.__class__.__name__
        self.details = details or {}
        self.timestamp = datetime.now(timezone.utc)


class DomainError(QpfError, ValueError):
    pass


class ShapeError(QpfError, ValueError):
    pass


class ValidationError(QpfError, ValueError):
    pass


class CatalogueError(QpfError, LookupError):
    pass


class ArityError(QpfError, ValueError):
    pass


class CapacityError(QpfError):
    pass


class UnsupportedFormError(QpfError):
    pass


class LeakageError(QpfError):
    def __init__(self, message: str, leakage: float, **kwargs):
        super().__init__(message, **kwargs)
        self.leakage = leakage


class ParseError(QpfError, ValueError):
    """Raised by the text formats; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None, **kwargs):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, **kwargs)
        self.line = line


class GraphParseError(ParseError):
    pass


class PulseParseError(ParseError):
    pass
