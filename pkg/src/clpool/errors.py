"""Exception types shared across the package."""


class CLPoolError(Exception):
    """Base class for all package errors."""


class DomainError(CLPoolError, ValueError):
    """Input outside the mathematical domain of an operation
    (tick out of range, price out of bounds, non-positive liquidity, ...)."""


class StateError(CLPoolError, RuntimeError):
    """Operation applied to a pool in the wrong state
    (double initialize, swap before initialize, burning more than owned)."""


class SchemaError(CLPoolError, ValueError):
    """Malformed input file.  Carries the offending location."""

    def __init__(self, message: str, *, path: str | None = None,
                 line: int | None = None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class CoverageError(CLPoolError, ValueError):
    """A pricing/gas series does not cover a required timestamp span."""


class UsageError(CLPoolError, ValueError):
    """Bad command-line arguments or inconsistent flag combinations."""
