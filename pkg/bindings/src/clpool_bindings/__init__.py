"""Pandas-facing bindings over the clpool command-line tool."""

from .shell import (BindingsError, BoundPool, BoundQuote, CLIError,
                    bind_load_and_replay, bind_quote, bind_tables,
                    tool_version)

__version__ = "0.1.0"

__all__ = [
    "BindingsError", "BoundPool", "BoundQuote", "CLIError",
    "bind_load_and_replay", "bind_quote", "bind_tables", "tool_version",
    "__version__",
]
