"""
Economic dispatch c(y) and restricted dispatch c^A(y) for the equal-capacity pool.

The fast solver uses the fact that an optimal dispatch runs m - 1 units at
capacity and one unit at the partial output x. Only two structures can be
optimal: the cheapest m - 1 units at G with the cheapest outsider at x, or the
cheapest m units with one of them demoted to x.
"""
import math
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from chp_power.core.config.settings import settings
from chp_power.core.exceptions import DomainError, InfeasibleDemandError, InstanceTooLargeError
from chp_power.core.types import Megawatts, Money
from chp_power.market.model import (
    BidProfile,
    GeneratorCost,
    MarginalSplit,
    Market,
    cost_profile,
    rank_generators,
    tolerance,
)
from chp_power.utils.logger import get_logger

logger = get_logger(__name__)


class DispatchResult(BaseModel):
    """Optimal outputs and their cost on the profile the dispatch was solved against."""

    model_config = ConfigDict(frozen=True)

    demand: float
    outputs: Tuple[float, ...]
    total_cost: float
    split: MarginalSplit
    excluded: FrozenSet[int] = frozenset()
    x_holder: Optional[int] = None

    @property
    def committed(self) -> Tuple[int, ...]:
        return tuple(k for k, g in enumerate(self.outputs) if g > 0)


class StructuralCandidates(BaseModel):
    """Both structures that compete for the partial slot."""

    model_config = ConfigDict(frozen=True)

    split: MarginalSplit
    ranked: Tuple[int, ...]
    outsider: Optional[int] = None
    outsider_cost: Optional[float] = None
    demoted: Optional[int] = None
    demotion_cost: Optional[float] = None
    chosen: str = "none"  # none, full, outsider, demotion


class DispatchPlan(NamedTuple):
    ranked: Tuple[int, ...]
    split: MarginalSplit
    assignment: Dict[int, float]
    x_holder: Optional[int]
    candidates: StructuralCandidates


def marginal_split(demand: Megawatts, capacity: Megawatts, available: int) -> MarginalSplit:
    """m = ceil(y / G) and x = y - (m - 1) G with x in (0, G]; y = 0 gives (0, 0)."""
    if capacity <= 0:
        raise DomainError(f"capacity must be positive, got {capacity}")
    if demand < 0:
        raise DomainError(f"demand must be non-negative, got {demand}")

    available_capacity = available * capacity
    if demand > available_capacity + tolerance(demand, available_capacity):
        raise InfeasibleDemandError(demand, available_capacity)
    if demand == 0:
        return MarginalSplit(marginal_index=0, partial_output=0.0)

    tol = tolerance(capacity, demand)
    m = max(1, int(math.ceil(demand / capacity)))
    x = demand - (m - 1) * capacity
    # y lands just above a multiple of G
    if m > 1 and x <= tol:
        m -= 1
        x = demand - (m - 1) * capacity
    if capacity - x <= tol:
        x = capacity
    if m > available:
        raise InfeasibleDemandError(demand, available_capacity)
    return MarginalSplit(marginal_index=m, partial_output=min(x, capacity))


def _check_excluded(n: int, excluded: Iterable[int]) -> FrozenSet[int]:
    result = frozenset(excluded)
    for k in result:
        if not 0 <= k < n:
            raise DomainError(f"excluded generator {k + 1} outside 1..{n}")
    return result


def plan_dispatch(
    costs: Sequence[GeneratorCost],
    capacity: float,
    demand: float,
    excluded: FrozenSet[int] = frozenset(),
    deviators: FrozenSet[int] = frozenset(),
) -> DispatchPlan:
    """Solve the dispatch on a raw cost profile."""
    ranked = rank_generators(costs, capacity, deviators, excluded)
    split = marginal_split(demand, capacity, len(ranked))
    m, x = split.marginal_index, split.partial_output

    if m == 0:
        candidates = StructuralCandidates(split=split, ranked=ranked)
        return DispatchPlan(ranked, split, {}, None, candidates)

    if x == capacity:
        assignment = {k: capacity for k in ranked[:m]}
        candidates = StructuralCandidates(split=split, ranked=ranked, chosen="full")
        return DispatchPlan(ranked, split, assignment, None, candidates)

    prefix = ranked[: m - 1]
    prefix_cost = sum(costs[k].evaluate(capacity) for k in prefix)

    at_x = {k: costs[k].evaluate(x) for k in ranked[m - 1:]}
    cheapest = min(at_x.values())
    ties = [k for k, c in at_x.items() if c <= cheapest + tolerance(cheapest)]
    outsider = min(ties, key=lambda k: (k in deviators, k))
    outsider_cost = prefix_cost + at_x[outsider]

    demoted = None
    demotion_cost = None
    if prefix:
        demoted = min(prefix, key=lambda k: (-costs[k].variable_cost, k in deviators, k))
        marginal_full = costs[ranked[m - 1]].evaluate(capacity)
        demotion_cost = prefix_cost + marginal_full - costs[demoted].variable_cost * (capacity - x)

    if demotion_cost is None or outsider_cost <= demotion_cost + tolerance(outsider_cost, demotion_cost):
        assignment = {k: capacity for k in prefix}
        assignment[outsider] = x
        holder = outsider
        chosen = "outsider"
    else:
        assignment = {k: capacity for k in ranked[:m]}
        assignment[demoted] = x
        holder = demoted
        chosen = "demotion"

    candidates = StructuralCandidates(
        split=split,
        ranked=ranked,
        outsider=outsider,
        outsider_cost=outsider_cost,
        demoted=demoted,
        demotion_cost=demotion_cost,
        chosen=chosen,
    )
    return DispatchPlan(ranked, split, assignment, holder, candidates)


def _assignment_cost(costs: Sequence[GeneratorCost], assignment: Dict[int, float]) -> Money:
    return sum(costs[k].evaluate(g) for k, g in assignment.items())


def _result(
    n: int,
    costs: Sequence[GeneratorCost],
    demand: float,
    excluded: FrozenSet[int],
    split: MarginalSplit,
    assignment: Dict[int, float],
    holder: Optional[int],
) -> DispatchResult:
    outputs = [0.0] * n
    for k, g in assignment.items():
        outputs[k] = g
    return DispatchResult(
        demand=demand,
        outputs=tuple(outputs),
        total_cost=_assignment_cost(costs, assignment),
        split=split,
        excluded=excluded,
        x_holder=holder,
    )


def economic_dispatch(
    market: Market,
    demand: Megawatts,
    excluded: Iterable[int] = (),
    bids: Optional[BidProfile] = None,
) -> DispatchResult:
    """Cost-optimal dispatch of ``demand`` with the ``excluded`` generators barred."""
    costs, deviators = cost_profile(market, bids)
    barred = _check_excluded(market.n, excluded)
    plan = plan_dispatch(costs, market.capacity, demand, barred, deviators)
    result = _result(market.n, costs, demand, barred, plan.split, plan.assignment, plan.x_holder)
    logger.debug(
        "dispatch_solved",
        demand=demand,
        excluded=sorted(barred),
        total_cost=result.total_cost,
        structure=plan.candidates.chosen,
    )
    return result


def restricted_cost(
    market: Market,
    demand: Megawatts,
    excluded: Iterable[int] = (),
    bids: Optional[BidProfile] = None,
) -> Money:
    """c^A(y) without building a result model."""
    costs, deviators = cost_profile(market, bids)
    barred = _check_excluded(market.n, excluded)
    plan = plan_dispatch(costs, market.capacity, demand, barred, deviators)
    return _assignment_cost(costs, plan.assignment)


def structural_candidates(
    market: Market,
    demand: Megawatts,
    excluded: Iterable[int] = (),
    bids: Optional[BidProfile] = None,
) -> StructuralCandidates:
    costs, deviators = cost_profile(market, bids)
    barred = _check_excluded(market.n, excluded)
    return plan_dispatch(costs, market.capacity, demand, barred, deviators).candidates


def dispatch_oracle(
    market: Market,
    demand: Megawatts,
    excluded: Iterable[int] = (),
    bids: Optional[BidProfile] = None,
) -> DispatchResult:
    """Exhaustive enumeration of every structured assignment."""
    costs, deviators = cost_profile(market, bids)
    barred = _check_excluded(market.n, excluded)
    capacity = market.capacity
    ranked = rank_generators(costs, capacity, deviators, barred)
    limit = settings.DISPATCH_ORACLE_MAX_UNITS
    if len(ranked) > limit:
        raise InstanceTooLargeError("dispatch oracle fleet", len(ranked), limit)

    split = marginal_split(demand, capacity, len(ranked))
    m, x = split.marginal_index, split.partial_output
    if m == 0:
        return _result(market.n, costs, demand, barred, split, {}, None)

    rank_of = {k: r for r, k in enumerate(ranked)}
    available = sorted(ranked)
    prefix = set(ranked[: m - 1])

    options: List[Tuple[float, tuple, Dict[int, float], Optional[int]]] = []
    if x == capacity:
        for subset in combinations(available, m):
            assignment = {k: capacity for k in subset}
            key = (tuple(sorted(rank_of[k] for k in subset)),)
            options.append((_assignment_cost(costs, assignment), key, assignment, None))
    else:
        for holder in available:
            others = [k for k in available if k != holder]
            for subset in combinations(others, m - 1):
                assignment = {k: capacity for k in subset}
                assignment[holder] = x
                key = (
                    holder in prefix,
                    (holder in deviators, holder),
                    tuple(sorted(rank_of[k] for k in assignment)),
                )
                options.append((_assignment_cost(costs, assignment), key, assignment, holder))

    best = min(cost for cost, _, _, _ in options)
    tied = [opt for opt in options if opt[0] <= best + tolerance(best)]
    _, _, assignment, holder = min(tied, key=lambda opt: opt[1])
    return _result(market.n, costs, demand, barred, split, assignment, holder)
