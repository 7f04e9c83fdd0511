"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: parse/validation/config errors exit
with 1, solver cap refusals with 2, and plain I/O failures (OSError)
with 3.
"""


class SpanAlignError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SpanAlignError):
    """A file could not be parsed. Carries the path and 1-based line."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


class ValidationError(SpanAlignError):
    """Data violates a structural invariant or references a missing id."""


class ConfigError(SpanAlignError):
    """A configuration value or combination of values is unusable."""


class SolverCapError(SpanAlignError):
    """The exact solver refused an instance larger than its cap."""
