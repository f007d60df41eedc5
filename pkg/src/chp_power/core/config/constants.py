"""
Constants for the CHP market power engine.

This module defines solver defaults, oracle sampling sizes, report formats
and process exit codes shared by the library and the command line.
"""

from enum import IntEnum
from typing import Dict, Tuple


class AppConstants:
    """Application-level constants."""

    APP_NAME = "CHP Market Power"
    APP_VERSION = "1.0.0"
    APP_DESCRIPTION = "Market power analysis for convex hull pricing in an equal-capacity pool"
    CLI_NAME = "chp"


class SolverConstants:
    """Numerical defaults of the dispatch and pricing layers."""

    DEFAULT_TOLERANCE = 1e-9
    PRICE_SCAN_EPSILON = 1e-6

    # Enumeration bounds
    DISPATCH_ORACLE_MAX_UNITS = 12
    COALITION_ENUMERATION_LIMIT = 10**7


class OracleConstants:
    """Sampling sizes of the best-response oracles."""

    DEFAULT_GRID_STEP = 1e-3
    MAX_GRID_POINTS = 20001
    CHECK_GRID_POINTS = 1001
    PAIR_GRID_POINTS = 41

    # Uniform bid grids extend this far above the dearest average cost
    GRID_HEADROOM = 1.0


class RandomInstanceConstants:
    """Ranges of the seeded random markets used by the property suites."""

    STARTUP_RANGE: Tuple[float, float] = (0.0, 100.0)
    VARIABLE_RANGE: Tuple[float, float] = (0.0, 10.0)
    CAPACITY_RANGE: Tuple[float, float] = (1.0, 100.0)
    MAX_UNITS_DISPATCH = 6
    MAX_UNITS_COALITION = 8
    MAX_UNITS_ORACLE = 5
    MINIMALITY_GRID_POINTS = 100

    # instances per suite when no override is given
    SUITE_TRIALS: Dict[str, int] = {
        "dispatch_oracle_equivalence": 500,
        "dispatch_structure": 500,
        "uplift_minimality": 200,
        "allocation_identity": 200,
        "marginal_cost_bounds": 500,
        "exclusion_increments": 500,
        "pair_supermodularity": 500,
        "power_non_negative": 200,
        "payment_identity": 200,
        "oracle": 200,
        "set_supermodularity": 200,
    }


class ReportConstants:
    """Output formats."""

    CSV_COLUMNS: Tuple[str, ...] = (
        "load_mw",
        "coalition_size",
        "n_coalitions",
        "n_with_power",
        "pct_with_power",
        "mean_power",
        "mean_power_powerholders",
        "max_power",
    )
    SIZE_SUMMARY_COLUMNS: Tuple[str, ...] = CSV_COLUMNS[1:]
    CSV_FLOAT_FORMAT = "%.6f"
    TABLE_FLOAT_FORMAT = "{:.6f}"
    BY_SIZE_SUFFIX = ".by_size.csv"


class ExitCode(IntEnum):
    """Process exit codes of the command line."""

    OK = 0
    DOMAIN_ERROR = 1
    USAGE_ERROR = 2
