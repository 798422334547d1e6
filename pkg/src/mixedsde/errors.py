"""Exception hierarchy shared across the package."""


class MixedSdeError(Exception):
    """Base class for all package errors."""


class DomainError(MixedSdeError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class GridMismatchError(DomainError):
    """Two paths that must share a time grid do not."""


class SynthesisError(MixedSdeError):
    """Path synthesis failed (e.g. circulant embedding eigenvalues negative)."""


class ResourceError(MixedSdeError):
    """An operation would exceed a configured size cap."""


class EstimationError(MixedSdeError):
    """A statistical estimate cannot be produced (e.g. every path blew up)."""


class ConfigError(MixedSdeError):
    """An experiment config file failed to parse or validate."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
