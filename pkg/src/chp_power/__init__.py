"""
Market power analysis for convex hull pricing in an equal-capacity pool.
"""
from chp_power.core.config.constants import AppConstants

__version__ = AppConstants.APP_VERSION

__all__ = ["__version__"]
