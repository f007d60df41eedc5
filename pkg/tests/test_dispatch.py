"""Tests for economic dispatch, restricted dispatch and the enumeration oracle."""
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from chp_power.core.exceptions import DomainError, InfeasibleDemandError, InstanceTooLargeError
from chp_power.market.dispatch import (
    dispatch_oracle,
    economic_dispatch,
    marginal_split,
    restricted_cost,
    structural_candidates,
)
from chp_power.market.model import BidProfile, Market, merit_order, tolerance
from tests.strategies import markets_with_demand


def test_worked_dispatch(m4):
    result = economic_dispatch(m4, 15)
    assert result.outputs == (10, 5, 0, 0)
    assert result.total_cost == pytest.approx(40)
    assert result.split.marginal_index == 2
    assert result.split.partial_output == 5
    assert result.x_holder == 1
    assert result.committed == (0, 1)


def test_dispatch_without_cheapest_unit(m4):
    result = economic_dispatch(m4, 15, excluded={0})
    assert result.outputs == (0, 10, 5, 0)
    assert result.total_cost == pytest.approx(55)
    assert result.excluded == frozenset({0})


def test_zero_and_full_demand(m4):
    empty = economic_dispatch(m4, 0)
    assert empty.outputs == (0, 0, 0, 0)
    assert empty.total_cost == 0
    assert empty.x_holder is None

    full = economic_dispatch(m4, 40)
    assert full.outputs == (10, 10, 10, 10)
    assert full.total_cost == pytest.approx(140)


def test_dispatch_errors(m4):
    with pytest.raises(DomainError):
        economic_dispatch(m4, -1)
    with pytest.raises(InfeasibleDemandError) as exc:
        economic_dispatch(m4, 41)
    assert exc.value.shortfall == pytest.approx(1)
    assert exc.value.code == "E_INFEASIBLE"
    with pytest.raises(InfeasibleDemandError) as exc:
        economic_dispatch(m4, 15, excluded={0, 1, 2})
    assert exc.value.details["available_capacity"] == 10
    with pytest.raises(DomainError):
        economic_dispatch(m4, 15, excluded={4})


def test_remaining_capacity_exactly_covers_demand(m4):
    result = economic_dispatch(m4, 20, excluded={0, 1})
    assert result.outputs == (0, 0, 10, 10)


@pytest.mark.parametrize(
    "demand, capacity, expected",
    [(15, 10, (2, 5)), (20, 10, (2, 10)), (0, 10, (0, 0)), (10, 10, (1, 10)), (3, 10, (1, 3))],
)
def test_marginal_split(demand, capacity, expected):
    split = marginal_split(demand, capacity, available=4)
    assert (split.marginal_index, split.partial_output) == expected


def test_marginal_split_snaps_rounding_noise():
    split = marginal_split(30.000000000001, 10, available=3)
    assert (split.marginal_index, split.partial_output) == (3, 10)


def test_marginal_split_infeasible():
    with pytest.raises(InfeasibleDemandError):
        marginal_split(35, 10, available=3)
    with pytest.raises(DomainError):
        marginal_split(-1, 10, available=3)


def test_oracle_three_units(m3):
    result = dispatch_oracle(m3, 15)
    assert result.total_cost == pytest.approx(40)
    assert result.outputs == (10, 5, 0)


def test_oracle_matches_on_full_demand(m4):
    assert dispatch_oracle(m4, 40).outputs == economic_dispatch(m4, 40).outputs


def test_oracle_bound(settings_override):
    market = Market.from_costs(1, [1] * 13, [1] * 13)
    with pytest.raises(InstanceTooLargeError):
        dispatch_oracle(market, 5)
    settings_override(DISPATCH_ORACLE_MAX_UNITS=4)
    with pytest.raises(InstanceTooLargeError):
        dispatch_oracle(market, 5, excluded=range(8))


@pytest.mark.parametrize(
    "excluded, cost",
    [
        ((), 40),
        ((0,), 55),
        ((1,), 45),
        ((2,), 40),
        ((3,), 40),
        ((0, 1), 70),
        ((0, 2), 60),
        ((0, 3), 55),
        ((1, 2), 50),
        ((1, 3), 45),
        ((2, 3), 40),
    ],
)
def test_restricted_costs_of_worked_market(m4, excluded, cost):
    assert restricted_cost(m4, 15, excluded) == pytest.approx(cost)
    assert dispatch_oracle(m4, 15, excluded).total_cost == pytest.approx(cost)


def test_outsider_takes_partial_slot(m4):
    candidates = structural_candidates(m4, 15)
    assert candidates.chosen == "outsider"
    assert candidates.outsider == 1
    assert candidates.outsider_cost == pytest.approx(40)
    assert candidates.demoted == 0
    assert candidates.demotion_cost == pytest.approx(45)


def test_prefix_unit_demoted_to_partial_slot():
    """A cheap-to-start unit with a high variable cost is cheaper to run part-loaded."""
    market = Market.from_costs(10, [0, 100], [3, 0])
    result = economic_dispatch(market, 15)
    assert result.outputs == (5, 10)
    assert result.total_cost == pytest.approx(115)
    assert result.x_holder == 0
    assert structural_candidates(market, 15).chosen == "demotion"
    assert dispatch_oracle(market, 15).outputs == result.outputs


def test_dispatch_on_reported_costs(m4):
    """Generator 2 reporting 2.9 keeps the partial slot: f(5) = 24.5 beats 25."""
    bids = BidProfile.deviation(m4, 1, 2.9)
    result = economic_dispatch(m4, 15, bids=bids)
    assert result.outputs == (10, 5, 0, 0)
    assert result.total_cost == pytest.approx(44.5)


def test_deviator_loses_partial_slot_tie(m4):
    """At a report of 3, generators 2 and 3 tie at x; the truthful one wins."""
    bids = BidProfile.deviation(m4, 1, 3.0)
    result = economic_dispatch(m4, 15, bids=bids)
    assert result.outputs == (10, 0, 5, 0)
    assert dispatch_oracle(m4, 15, bids=bids).outputs == result.outputs


@given(markets_with_demand(max_units=6))
@settings(max_examples=300, deadline=None)
def test_fast_dispatch_matches_enumeration(instance):
    market, demand = instance
    fast = economic_dispatch(market, demand)
    slow = dispatch_oracle(market, demand)
    assert fast.total_cost == pytest.approx(slow.total_cost, rel=1e-9, abs=1e-9)


@given(markets_with_demand(max_units=6))
@settings(max_examples=300, deadline=None)
def test_dispatch_structure(instance):
    """Outputs in {0, x, G}, balance holds, and rank constrains each output."""
    market, demand = instance
    result = economic_dispatch(market, demand)
    m, x = result.split.marginal_index, result.split.partial_output
    capacity = market.capacity

    assert sum(result.outputs) == pytest.approx(demand, rel=1e-9, abs=1e-9)
    assert all(g in (0.0, x, capacity) for g in result.outputs)
    total = sum(c.evaluate(g) for c, g in zip(market.generators, result.outputs))
    assert result.total_cost == pytest.approx(total)

    for rank, k in enumerate(merit_order(market), start=1):
        g = result.outputs[k]
        if rank < m:
            assert g in (x, capacity)
        if rank > m:
            assert g in (0.0, x)


@given(markets_with_demand(min_units=2, max_units=6), st.data())
@settings(max_examples=200, deadline=None)
def test_excluded_units_stay_off(instance, data):
    market, _ = instance
    excluded = data.draw(st.sets(st.integers(0, market.n - 1), max_size=market.n - 1))
    share = data.draw(st.floats(0.0, 1.0, allow_nan=False))
    demand = share * (market.n - len(excluded)) * market.capacity
    result = economic_dispatch(market, demand, excluded)
    assert all(result.outputs[k] == 0 for k in excluded)


@given(markets_with_demand(max_units=6), st.floats(0.0, 1.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_cost_non_decreasing_in_demand(instance, fraction):
    market, demand = instance
    cheaper = restricted_cost(market, demand * fraction)
    dearer = restricted_cost(market, demand)
    assert cheaper <= dearer + tolerance(cheaper, dearer) * 10


@given(markets_with_demand(min_units=3, max_units=6, excluded=2), st.data())
@settings(max_examples=200, deadline=None)
def test_more_exclusions_never_cheapen(instance, data):
    market, demand = instance
    i, j = data.draw(st.lists(st.integers(0, market.n - 1), min_size=2, max_size=2, unique=True))
    base = restricted_cost(market, demand)
    one = restricted_cost(market, demand, {i})
    both = restricted_cost(market, demand, {i, j})
    assert base <= one + tolerance(one)
    assert one <= both + tolerance(both)


@given(markets_with_demand(min_units=2, max_units=6))
@settings(max_examples=300, deadline=None)
def test_full_block_increment_bounded_by_neighbours(instance):
    """c(y) - c(y - G) lies between the (m-1)-th and m-th full-capacity costs for y in (G, nG]."""
    market, demand = instance
    capacity = market.capacity
    # map (0, nG] onto (G, nG]
    demand = capacity + demand * (market.n - 1) / market.n
    assume(demand > capacity + tolerance(capacity, demand))
    m = marginal_split(demand, capacity, market.n).marginal_index
    assert m >= 2
    ordered = sorted(market.full_costs())
    increment = restricted_cost(market, demand) - restricted_cost(market, demand - capacity)
    slack = tolerance(increment, ordered[-1]) * 10
    assert ordered[m - 2] - slack <= increment <= ordered[m - 1] + slack


@given(markets_with_demand(min_units=3, max_units=7, excluded=2))
@settings(max_examples=150, deadline=None)
def test_exclusion_costs_have_increasing_differences(instance):
    """c^{i,j}(y) - c^{j}(y) >= c^{i}(y) - c(y) for every ordered pair."""
    market, demand = instance
    base = restricted_cost(market, demand)
    single = [restricted_cost(market, demand, {k}) for k in range(market.n)]
    for i in range(market.n):
        for j in range(market.n):
            if i == j:
                continue
            pair = restricted_cost(market, demand, {i, j})
            assert pair - single[j] >= single[i] - base - tolerance(pair) * 10
