"""
Type definitions for the CHP market power engine.
"""
from enum import Enum


class DispatchTarget(str, Enum):
    """Output levels a generator can be dispatched at."""
    ZERO = "0"
    PARTIAL = "x"
    FULL = "G"


class Verb(str, Enum):
    """Command line verbs."""
    DISPATCH = "dispatch"
    PRICE = "price"
    POWER = "power"
    COALITIONS = "coalitions"
    SWEEP = "sweep"
    CHECK = "check"


# Custom types
Money = float
Megawatts = float
PricePerMW = float


def parse_dispatch_target(value: str) -> DispatchTarget:
    """Accept '0', 'x' or 'G' (case-insensitive for the letters)."""
    normalized = value.strip()
    for target in DispatchTarget:
        if normalized.lower() == target.value.lower():
            return target
    raise ValueError(f"unknown dispatch target: {value!r}")
