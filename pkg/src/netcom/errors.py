"""Exception hierarchy shared by every netcom module."""


class NetcomError(Exception):
    """Base class for all library errors."""


class ParseError(NetcomError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(NetcomError, ValueError):
    """An argument lies outside the domain of the operation."""


class UndefinedSimilarityError(NetcomError, ArithmeticError):
    """Similarity is undefined for the pair (zero-norm or constant vector)."""


class EmptyIndexError(NetcomError, ValueError):
    pass


class UndefinedMeasureError(NetcomError, ArithmeticError):
    """A quality measure is undefined for its input (no edges, S = V, ...)."""
