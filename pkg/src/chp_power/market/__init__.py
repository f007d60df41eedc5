"""
Market clearing, pricing and market power analysis.
"""
from chp_power.market.dispatch import DispatchResult, dispatch_oracle, economic_dispatch, marginal_split
from chp_power.market.model import BidProfile, GeneratorCost, MarginalSplit, Market, evaluate_cost, merit_order
from chp_power.market.pricing import PriceResult, clear_market, convex_hull_price, uplift
from chp_power.market.strategic import (
    coalition_power,
    market_power_index,
    power_report,
    strategic_profit,
    truthful_profit,
)

__all__ = [
    "BidProfile",
    "DispatchResult",
    "GeneratorCost",
    "MarginalSplit",
    "Market",
    "PriceResult",
    "clear_market",
    "coalition_power",
    "convex_hull_price",
    "dispatch_oracle",
    "economic_dispatch",
    "evaluate_cost",
    "marginal_split",
    "market_power_index",
    "merit_order",
    "power_report",
    "strategic_profit",
    "truthful_profit",
    "uplift",
]
