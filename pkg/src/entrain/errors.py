"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and its
ParseError subclass) -> 2, anything else -> 3.
"""

from __future__ import annotations


class EntrainError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(EntrainError):
    """Invalid configuration or command-line usage."""


class DataError(EntrainError):
    """Input data violates a documented contract."""


class ParseError(DataError):
    """Malformed input file; message names the offending location."""

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.source = source
        self.line = line
        if source is not None and line is not None:
            message = f"{source}, line {line}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        elif source is not None:
            message = f"{source}: {message}"
        super().__init__(message)
