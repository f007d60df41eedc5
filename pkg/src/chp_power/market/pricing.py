"""
Convex hull pricing: desired outputs, maximal profits and uplift payments.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from chp_power.core.config.settings import settings
from chp_power.core.exceptions import DomainError
from chp_power.core.types import Megawatts, Money, PricePerMW
from chp_power.market.dispatch import DispatchResult, economic_dispatch, marginal_split
from chp_power.market.model import (
    BidProfile,
    GeneratorCost,
    Market,
    cost_profile,
    rank_generators,
    tolerance,
)
from chp_power.utils.logger import get_logger

logger = get_logger(__name__)


class ClearingPrice(BaseModel):
    """p* with the merit position that sets it."""

    model_config = ConfigDict(frozen=True)

    price: float
    marginal_index: int
    degenerate_demand: bool = False


class PriceResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    price: float
    desired_outputs: Tuple[float, ...]
    max_profits: Tuple[float, ...]
    uplifts: Tuple[float, ...]
    total_uplift: float
    dispatch: DispatchResult
    degenerate_demand: bool = False


class UpliftVerdict(BaseModel):
    """Outcome of scanning total uplift over candidate prices."""

    model_config = ConfigDict(frozen=True)

    holds: bool
    worst_gap: float
    price: float
    uplift_at_price: float
    best_candidate_price: float
    best_candidate_uplift: float
    candidates_checked: int


def desired_output(cost: GeneratorCost, price: PricePerMW, capacity: Megawatts) -> Megawatts:
    """G when producing at capacity breaks even at ``price``, else 0."""
    margin = price * capacity - cost.evaluate(capacity)
    if margin >= -tolerance(price * capacity, cost.evaluate(capacity)):
        return capacity
    return 0.0


def max_profit(cost: GeneratorCost, price: PricePerMW, capacity: Megawatts) -> Money:
    return max(0.0, price * capacity - cost.evaluate(capacity))


def convex_hull_price(
    market: Market, demand: Megawatts, bids: Optional[BidProfile] = None
) -> ClearingPrice:
    """The m-th smallest (reported) average cost f(G)/G."""
    costs, deviators = cost_profile(market, bids)
    split = marginal_split(demand, market.capacity, market.n)
    m = split.marginal_index
    if m == 0:
        return ClearingPrice(price=0.0, marginal_index=0, degenerate_demand=True)

    ranked = rank_generators(costs, market.capacity, deviators)
    price = costs[ranked[m - 1]].evaluate(market.capacity) / market.capacity
    return ClearingPrice(price=price, marginal_index=m)


def _uplifts(
    costs: Sequence[GeneratorCost], capacity: float, price: float, outputs: Sequence[float]
) -> Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[float, ...]]:
    desired = tuple(desired_output(c, price, capacity) for c in costs)
    profits = tuple(max_profit(c, price, capacity) for c in costs)
    uplifts = tuple(
        pi - (price * g - c.evaluate(g)) for c, pi, g in zip(costs, profits, outputs)
    )
    return desired, profits, uplifts


def uplift(
    market: Market,
    demand: Megawatts,
    price: PricePerMW,
    bids: Optional[BidProfile] = None,
) -> PriceResult:
    """Uplift_i = pi_i*(p) - [p g_i - f_i(g_i)] against the deterministic dispatch."""
    if price < 0:
        raise DomainError(f"price must be non-negative, got {price}")
    costs, _ = cost_profile(market, bids)
    dispatch = economic_dispatch(market, demand, bids=bids)
    desired, profits, uplifts = _uplifts(costs, market.capacity, price, dispatch.outputs)
    return PriceResult(
        price=price,
        desired_outputs=desired,
        max_profits=profits,
        uplifts=uplifts,
        total_uplift=sum(uplifts),
        dispatch=dispatch,
        degenerate_demand=dispatch.split.marginal_index == 0,
    )


def total_uplift_at(
    market: Market,
    demand: Megawatts,
    price: PricePerMW,
    dispatch: Optional[DispatchResult] = None,
    bids: Optional[BidProfile] = None,
) -> Money:
    """Total uplift of a fixed dispatch at any price."""
    costs, _ = cost_profile(market, bids)
    if dispatch is None:
        dispatch = economic_dispatch(market, demand, bids=bids)
    _, _, uplifts = _uplifts(costs, market.capacity, price, dispatch.outputs)
    return sum(uplifts)


def clear_market(
    market: Market, demand: Megawatts, bids: Optional[BidProfile] = None
) -> PriceResult:
    """Price at p* and settle uplifts in one call."""
    clearing = convex_hull_price(market, demand, bids)
    result = uplift(market, demand, clearing.price, bids)
    logger.debug("market_cleared", demand=demand, price=clearing.price, total_uplift=result.total_uplift)
    return result


def verify_uplift_minimality(
    market: Market, demand: Megawatts, grid_points: int = 100
) -> UpliftVerdict:
    """Check that p* minimizes total uplift over kinks and a uniform price grid."""
    if grid_points < 1:
        raise DomainError(f"grid_points must be >= 1, got {grid_points}")

    dispatch = economic_dispatch(market, demand)
    clearing = convex_hull_price(market, demand)
    at_price = total_uplift_at(market, demand, clearing.price, dispatch)

    averages = np.array(market.full_costs()) / market.capacity
    epsilon = settings.PRICE_SCAN_EPSILON
    kinks = np.concatenate([averages - epsilon, averages + epsilon])
    uniform = np.linspace(0.0, float(averages.max()) + 1.0, grid_points)
    candidates = np.unique(np.concatenate([kinks[kinks >= 0], uniform]))

    best_price = clearing.price
    best_uplift = at_price
    worst_gap = -np.inf
    for p in candidates:
        value = total_uplift_at(market, demand, float(p), dispatch)
        worst_gap = max(worst_gap, at_price - value)
        if value < best_uplift:
            best_price, best_uplift = float(p), value

    holds = worst_gap <= tolerance(at_price, best_uplift)
    return UpliftVerdict(
        holds=holds,
        worst_gap=float(worst_gap),
        price=clearing.price,
        uplift_at_price=at_price,
        best_candidate_price=best_price,
        best_candidate_uplift=best_uplift,
        candidates_checked=int(candidates.size),
    )
