"""
Parsers for command line values.
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from chp_power.core.exceptions import UsageError


def _parse_float(text: str, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"{what} is not a number: {text!r}")
    if not math.isfinite(value):
        raise UsageError(f"{what} must be finite: {text!r}")
    return value


def parse_load_spec(text: str) -> Tuple[List[float], bool]:
    """Parse ``v`` or ``min:max:step`` into (loads, is_range).

    Range endpoints are inclusive; the last load is kept when it lands
    within half a step of ``max``.
    """
    parts = text.split(":")
    if len(parts) == 1:
        value = _parse_float(parts[0], "load")
        if value < 0:
            raise UsageError(f"load must be non-negative: {text!r}")
        return [value], False

    if len(parts) != 3:
        raise UsageError(f"load must be 'v' or 'min:max:step': {text!r}")

    low, high, step = (_parse_float(p, "load") for p in parts)
    if low < 0 or high < low:
        raise UsageError(f"load range must satisfy 0 <= min <= max: {text!r}")
    if step <= 0:
        raise UsageError(f"load step must be positive: {text!r}")

    count = int(math.floor((high - low) / step + 0.5)) + 1
    loads = low + step * np.arange(count)
    loads = loads[loads <= high + step * 1e-9]
    return [float(v) for v in loads], True


def parse_index_list(text: Optional[str], n: int) -> List[int]:
    """Parse a comma list of 1-based generator indices into sorted 0-based ones."""
    if text is None or text.strip() == "":
        return []

    indices = set()
    for token in text.split(","):
        token = token.strip()
        try:
            value = int(token)
        except ValueError:
            raise UsageError(f"generator index is not an integer: {token!r}")
        if not 1 <= value <= n:
            raise UsageError(f"generator index {value} outside 1..{n}")
        indices.add(value - 1)
    return sorted(indices)
