"""
ercavity/errors.py
Exception hierarchy. The CLI maps these to exit codes in one place:
  UsageError / ParseError          -> 2
  DomainError / ConfigurationError -> 3
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for every error raised on purpose by ercavity."""
    exit_code = 3


class DomainError(ToolkitError, ValueError):
    """A numerical input lies outside the domain of the operation."""
    exit_code = 3


class ConfigurationError(ToolkitError, ValueError):
    """Settings that cannot produce a valid computation (grid, step size, window)."""
    exit_code = 3


class UsageError(ToolkitError):
    """Bad flags, bad config file, missing input file."""
    exit_code = 2


class ParseError(ToolkitError, ValueError):
    """Malformed input file. Carries the 1-based line number when known."""
    exit_code = 2

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ''
        if path:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class GridValidationError(ParseError):
    """A field grid violates its invariants (eps < 1, non-finite, zero field)."""
