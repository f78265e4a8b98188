"""Concentrated-liquidity pool replay engine and market-structure analytics."""

from .engine import Pool, Position, SwapResult, TickInfo
from .errors import (CLPoolError, CoverageError, DomainError, SchemaError,
                     StateError, UsageError)

__version__ = "0.1.0"

__all__ = [
    "Pool", "Position", "SwapResult", "TickInfo",
    "CLPoolError", "CoverageError", "DomainError", "SchemaError",
    "StateError", "UsageError",
    "__version__",
]
