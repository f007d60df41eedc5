"""
Strategic bidding under convex hull pricing.

Benchmark profits, the profit of a single deviating generator, brute-force
best responses over the reported variable cost, and the closed-form market
power indices of single generators and coalitions.
"""
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from chp_power.core.config.constants import OracleConstants
from chp_power.core.config.settings import settings
from chp_power.core.exceptions import DomainError, InfeasibleDemandError
from chp_power.core.types import DispatchTarget, Megawatts, Money, parse_dispatch_target
from chp_power.market.dispatch import (
    DispatchResult,
    marginal_split,
    plan_dispatch,
    restricted_cost,
)
from chp_power.market.model import BidProfile, GeneratorCost, Market, rank_generators, tolerance
from chp_power.market.pricing import convex_hull_price, uplift
from chp_power.utils.logger import get_logger

logger = get_logger(__name__)


class StrategicOutcome(BaseModel):
    """Settlement of one generator misreporting its variable cost."""

    model_config = ConfigDict(frozen=True)

    deviator: int
    reported_v: float
    price: float
    dispatch: DispatchResult
    profit: float
    bid_profit: float
    cost_guise: float
    settled_profit: float


class BestResponse(BaseModel):
    """Supremum of the true profit over reported variable costs."""

    model_config = ConfigDict(frozen=True)

    generator: int
    sup_profit: float
    benchmark_profit: float
    arg_v: float
    attained: bool
    candidates: int

    @property
    def sup_gain(self) -> float:
        return self.sup_profit

    @property
    def additional_gain(self) -> float:
        return self.sup_profit - self.benchmark_profit


class CoalitionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    members: FrozenSet[int]
    power: Optional[float] = None
    feasible: bool
    restricted_cost: Optional[float] = None


class SupermodularityViolation(BaseModel):
    """M(A u B) < M(A) + M(B) beyond tolerance."""

    model_config = ConfigDict(frozen=True)

    first: FrozenSet[int]
    second: FrozenSet[int]
    joint_power: float
    summed_power: float

    @property
    def gap(self) -> float:
        return self.summed_power - self.joint_power


class PowerReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    demand: float
    benchmark_profits: Tuple[float, ...]
    closed_form_power: Tuple[float, ...]
    oracle_power: Optional[Tuple[BestResponse, ...]] = None
    equality_flags: Optional[Tuple[bool, ...]] = None
    equality_rate: Optional[float] = None


def truthful_profit(market: Market, demand: Megawatts, generator: int) -> Money:
    """P_i = {f_m(G) - f_i(G)}^+ under truthful bids."""
    market.check_index(generator)
    split = marginal_split(demand, market.capacity, market.n)
    if split.marginal_index == 0:
        return 0.0
    ranked = rank_generators(market.generators, market.capacity)
    marginal_full = market.generators[ranked[split.marginal_index - 1]].evaluate(market.capacity)
    return max(0.0, marginal_full - market.generators[generator].evaluate(market.capacity))


def _check_report(value: float) -> None:
    if not np.isfinite(value) or value < 0:
        raise DomainError(f"reported variable cost must be finite and >= 0, got {value}")


def _report_profits(market: Market, demand: Megawatts, reports: Dict[int, float]) -> Dict[int, float]:
    """True profits of the reporting generators; everyone else truthful."""
    capacity = market.capacity
    costs: List[GeneratorCost] = list(market.generators)
    deviators = set()
    for k, v in reports.items():
        if v != costs[k].variable_cost:
            costs[k] = costs[k].with_variable_cost(v)
            deviators.add(k)
    plan = plan_dispatch(costs, capacity, demand, frozenset(), frozenset(deviators))
    m = plan.split.marginal_index
    if m == 0:
        return {k: 0.0 for k in reports}
    marginal_full = costs[plan.ranked[m - 1]].evaluate(capacity)
    profits = {}
    for k, v in reports.items():
        output = plan.assignment.get(k, 0.0)
        rent = max(0.0, marginal_full - costs[k].evaluate(capacity))
        profits[k] = rent + (v - market.generators[k].variable_cost) * output
    return profits


def strategic_profit(
    market: Market, demand: Megawatts, generator: int, reported_v: float
) -> StrategicOutcome:
    """Profit of ``generator`` reporting ``reported_v`` while all others bid truthfully."""
    _check_report(reported_v)
    bids = BidProfile.deviation(market, generator, reported_v)
    clearing = convex_hull_price(market, demand, bids)
    settlement = uplift(market, demand, clearing.price, bids)
    dispatch = settlement.dispatch

    reported = bids.costs[generator]
    true = market.generators[generator]
    output = dispatch.outputs[generator]

    bid_profit = max(0.0, clearing.price * market.capacity - reported.evaluate(market.capacity))
    cost_guise = reported.evaluate(output) - true.evaluate(output)
    settled = clearing.price * output + settlement.uplifts[generator] - true.evaluate(output)

    return StrategicOutcome(
        deviator=generator,
        reported_v=reported_v,
        price=clearing.price,
        dispatch=dispatch,
        profit=bid_profit + cost_guise,
        bid_profit=bid_profit,
        cost_guise=cost_guise,
        settled_profit=settled,
    )


def _require_exclusion_feasible(market: Market, demand: Megawatts, size: int) -> None:
    available = (market.n - size) * market.capacity
    if demand > available + tolerance(demand, available):
        raise InfeasibleDemandError(demand, available)


def _bid_breakpoints(market: Market, demand: Megawatts, generator: int) -> List[float]:
    """Reports at which the merit order, the partial slot or the demoted unit can change."""
    capacity = market.capacity
    split = marginal_split(demand, capacity, market.n)
    x = split.partial_output
    startup = market.generators[generator].startup_cost

    points = []
    for k, cost in enumerate(market.generators):
        if k == generator:
            continue
        points.append((cost.evaluate(capacity) - startup) / capacity)
        points.append(cost.variable_cost)
        if 0 < x < capacity:
            points.append((cost.evaluate(x) - startup) / x)
    return sorted({p for p in points if p >= 0})


def _structure_costs(market: Market, demand: Megawatts, generator: int, reported_v: float):
    costs = list(market.generators)
    deviators: FrozenSet[int] = frozenset()
    if reported_v != costs[generator].variable_cost:
        costs[generator] = costs[generator].with_variable_cost(reported_v)
        deviators = frozenset({generator})
    candidates = plan_dispatch(costs, market.capacity, demand, frozenset(), deviators).candidates
    return candidates


def _switch_points(
    market: Market, demand: Megawatts, generator: int, breakpoints: Sequence[float], upper: float
) -> List[float]:
    """Reports where the two dispatch structures cost the same.

    Between consecutive breakpoints both structure costs are linear in the
    report, so two interior samples locate the crossing.
    """
    edges = [0.0] + [b for b in breakpoints if 0 < b < upper] + [upper]
    roots = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 4 * tolerance(lo, hi):
            continue
        t1 = lo + (hi - lo) / 3
        t2 = lo + 2 * (hi - lo) / 3
        c1 = _structure_costs(market, demand, generator, t1)
        c2 = _structure_costs(market, demand, generator, t2)
        if c1.demotion_cost is None or c2.demotion_cost is None:
            continue
        if (c1.outsider, c1.demoted) != (c2.outsider, c2.demoted):
            continue
        d1 = c1.outsider_cost - c1.demotion_cost
        d2 = c2.outsider_cost - c2.demotion_cost
        if d1 == d2:
            continue
        root = t1 - d1 * (t2 - t1) / (d2 - d1)
        if lo < root < hi:
            roots.append(root)
    return roots


def _grid_upper(market: Market) -> float:
    return max(market.full_costs()) / market.capacity + OracleConstants.GRID_HEADROOM


def _uniform_grid(upper: float, grid_step: float, max_points: int) -> np.ndarray:
    count = int(np.floor(upper / grid_step)) + 1
    return np.linspace(0.0, upper, max(2, min(count, max_points)))


def best_response_oracle(
    market: Market,
    demand: Megawatts,
    generator: int,
    grid_step: float = OracleConstants.DEFAULT_GRID_STEP,
    max_grid_points: Optional[int] = None,
) -> BestResponse:
    """Search the reported variable cost of one generator for its best true profit.

    Candidates are the truthful report, every breakpoint and structure switch
    together with their neighbours at +/- grid_step, and a uniform grid over
    [0, max f_k(G)/G + 1]. The supremum is reported as not attained when it
    is only approached from the left of a breakpoint where profit drops.
    """
    if grid_step <= 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    market.check_index(generator)
    _require_exclusion_feasible(market, demand, 1)
    max_points = max_grid_points or settings.ORACLE_MAX_GRID_POINTS

    truthful_v = market.generators[generator].variable_cost
    upper = _grid_upper(market)
    breakpoints = _bid_breakpoints(market, demand, generator)
    search_end = max([upper] + [b + OracleConstants.GRID_HEADROOM for b in breakpoints])
    switches = _switch_points(market, demand, generator, breakpoints, search_end)
    breakpoints = sorted(set(breakpoints) | set(switches))

    # report -> breakpoint it sits just left of
    samples: Dict[float, Optional[float]] = {b: None for b in breakpoints}
    for b in breakpoints:
        samples.setdefault(b + grid_step, None)
        if b - grid_step >= 0:
            samples.setdefault(b - grid_step, b)
    samples.setdefault(truthful_v, None)

    marked = np.array(sorted(samples))
    grid = _uniform_grid(upper, grid_step, max_points)
    if marked.size:
        nearest = np.abs(grid[:, None] - marked[None, :]).min(axis=1)
        grid = grid[nearest >= grid_step / 2]
    for v in grid:
        samples.setdefault(float(v), None)

    reports = sorted(samples)
    profits = np.array([_report_profits(market, demand, {generator: v})[generator] for v in reports])
    best = float(profits.max())
    near = profits >= best - tolerance(best)

    truthful_pos = reports.index(truthful_v)
    if near[truthful_pos]:
        pos = truthful_pos
    else:
        pos = int(np.flatnonzero(near)[-1])
    arg_v = reports[pos]

    attained = True
    edge = samples[arg_v]
    if edge is not None and pos > 0:
        rising = profits[pos - 1] < profits[pos] - tolerance(best)
        at_break = _report_profits(market, demand, {generator: edge})[generator]
        if rising and at_break < profits[pos] - tolerance(best):
            attained = False

    result = BestResponse(
        generator=generator,
        sup_profit=best,
        benchmark_profit=truthful_profit(market, demand, generator),
        arg_v=arg_v,
        attained=attained,
        candidates=len(reports),
    )
    logger.debug(
        "best_response_searched",
        generator=generator,
        sup_profit=result.sup_profit,
        arg_v=arg_v,
        attained=attained,
        candidates=len(reports),
    )
    return result


def case_supremum(
    market: Market,
    demand: Megawatts,
    generator: int,
    target: Union[DispatchTarget, str],
) -> Money:
    """Closed-form bound on the deviator's profit given its dispatched output."""
    market.check_index(generator)
    if not isinstance(target, DispatchTarget):
        try:
            target = parse_dispatch_target(target)
        except ValueError as e:
            raise DomainError(str(e))

    if target is DispatchTarget.ZERO:
        return 0.0

    capacity = market.capacity
    split = marginal_split(demand, capacity, market.n)
    if split.marginal_index == 0:
        raise DomainError("no generator is dispatched at zero demand")
    cost = market.generators[generator]
    excluded = {generator}
    without_i = restricted_cost(market, demand, excluded)

    if target is DispatchTarget.PARTIAL:
        full_blocks = (split.marginal_index - 1) * capacity
        return without_i - restricted_cost(market, full_blocks, excluded) - cost.evaluate(split.partial_output)

    if demand < capacity - tolerance(capacity):
        raise DomainError(f"demand {demand:g} MW is below the capacity {capacity:g} MW")
    residual = max(0.0, demand - capacity)
    return without_i - restricted_cost(market, residual, excluded) - cost.evaluate(capacity)


def market_power_index(market: Market, demand: Megawatts, generator: int) -> Money:
    """M(i) = c^{i}(y) - c(y) - P_i, unclamped."""
    market.check_index(generator)
    return (
        restricted_cost(market, demand, {generator})
        - restricted_cost(market, demand)
        - truthful_profit(market, demand, generator)
    )


def coalition_power(market: Market, demand: Megawatts, members: Iterable[int]) -> CoalitionReport:
    """M(A) = c^A(y) - c(y) - sum of P_i over A, when the rest can serve the load."""
    group = frozenset(members)
    if not group:
        raise DomainError("coalition must have at least one member")
    for k in group:
        market.check_index(k)

    available = (market.n - len(group)) * market.capacity
    if demand > available + tolerance(demand, available):
        return CoalitionReport(members=group, feasible=False)

    cost_without = restricted_cost(market, demand, group)
    benchmark = sum(truthful_profit(market, demand, k) for k in group)
    power = cost_without - restricted_cost(market, demand) - benchmark
    return CoalitionReport(members=group, power=power, feasible=True, restricted_cost=cost_without)


def _powers(market: Market, demand: Megawatts, max_size: int) -> Dict[FrozenSet[int], float]:
    powers = {}
    for size in range(1, max_size + 1):
        for group in combinations(range(market.n), size):
            report = coalition_power(market, demand, group)
            if report.feasible:
                powers[report.members] = report.power
    return powers


def check_supermodularity(market: Market, demand: Megawatts) -> List[SupermodularityViolation]:
    """Pairs with M(i u j) < M(i) + M(j) - tolerance."""
    powers = _powers(market, demand, 2)
    violations = []
    for i, j in combinations(range(market.n), 2):
        pair = frozenset({i, j})
        if pair not in powers:
            continue
        joint = powers[pair]
        summed = powers[frozenset({i})] + powers[frozenset({j})]
        if joint < summed - tolerance(joint, summed):
            violations.append(
                SupermodularityViolation(
                    first=frozenset({i}), second=frozenset({j}), joint_power=joint, summed_power=summed
                )
            )
    return violations


def check_set_supermodularity(
    market: Market, demand: Megawatts, max_size: int
) -> List[SupermodularityViolation]:
    """M(A u B) >= M(A) + M(B) for disjoint feasible sets; a diagnostic only."""
    powers = _powers(market, demand, max_size)
    violations = []
    for union, joint in powers.items():
        if len(union) < 2:
            continue
        members = sorted(union)
        anchor = members[0]
        # each split {A, B} once, with the smallest member in A
        for size in range(1, len(members)):
            for first in combinations(members, size):
                if anchor not in first:
                    continue
                a = frozenset(first)
                b = union - a
                summed = powers[a] + powers[b]
                if joint < summed - tolerance(joint, summed):
                    violations.append(
                        SupermodularityViolation(first=a, second=b, joint_power=joint, summed_power=summed)
                    )
    return violations


def pair_best_response_oracle(
    market: Market,
    demand: Megawatts,
    i: int,
    j: int,
    grid_step: float = OracleConstants.DEFAULT_GRID_STEP,
    grid_points: Optional[int] = None,
) -> Money:
    """Joint search over (v_i, v_j); returns the best summed profit above P_i + P_j."""
    if i == j:
        raise DomainError("pair oracle needs two distinct generators")
    if grid_step <= 0:
        raise DomainError(f"grid_step must be positive, got {grid_step}")
    market.check_index(i)
    market.check_index(j)
    _require_exclusion_feasible(market, demand, 2)
    points = grid_points or settings.PAIR_ORACLE_GRID_POINTS

    upper = _grid_upper(market)
    uniform = np.linspace(0.0, upper, points)

    def axis(k: int) -> List[float]:
        values = {market.generators[k].variable_cost}
        for b in _bid_breakpoints(market, demand, k):
            values.update({b, b + grid_step})
            if b - grid_step >= 0:
                values.add(b - grid_step)
        values.update(float(v) for v in uniform)
        return sorted(values)

    best = -np.inf
    for vi in axis(i):
        for vj in axis(j):
            profits = _report_profits(market, demand, {i: vi, j: vj})
            best = max(best, profits[i] + profits[j])

    benchmark = truthful_profit(market, demand, i) + truthful_profit(market, demand, j)
    return float(best) - benchmark


def power_report(
    market: Market,
    demand: Megawatts,
    oracle: bool = False,
    grid_step: float = OracleConstants.DEFAULT_GRID_STEP,
    max_grid_points: Optional[int] = None,
) -> PowerReport:
    """P_i and M(i) for every generator, optionally checked against the oracle."""
    _require_exclusion_feasible(market, demand, 1)
    benchmarks = tuple(truthful_profit(market, demand, k) for k in range(market.n))
    closed = tuple(market_power_index(market, demand, k) for k in range(market.n))

    if not oracle:
        return PowerReport(demand=demand, benchmark_profits=benchmarks, closed_form_power=closed)

    responses = tuple(
        best_response_oracle(market, demand, k, grid_step, max_grid_points) for k in range(market.n)
    )
    slack = market.capacity * grid_step
    flags = tuple(
        abs(r.additional_gain - m) <= slack + tolerance(m, r.additional_gain)
        for r, m in zip(responses, closed)
    )
    rate = sum(flags) / len(flags)
    logger.info("power_report_built", demand=demand, equality_rate=rate)
    return PowerReport(
        demand=demand,
        benchmark_profits=benchmarks,
        closed_form_power=closed,
        oracle_power=responses,
        equality_flags=flags,
        equality_rate=rate,
    )
