"""Tests for deviation profits, best responses and market power indices."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chp_power.core.config.constants import OracleConstants, RandomInstanceConstants
from chp_power.core.exceptions import DomainError, InfeasibleDemandError
from chp_power.core.types import DispatchTarget
from chp_power.market.checks import GATING_SUITES, random_demand, random_market
from chp_power.market.model import tolerance
from chp_power.market.strategic import (
    best_response_oracle,
    case_supremum,
    check_set_supermodularity,
    check_supermodularity,
    coalition_power,
    market_power_index,
    pair_best_response_oracle,
    power_report,
    strategic_profit,
    truthful_profit,
)
from tests.strategies import markets_with_demand

STEP = 0.01


def test_benchmark_profits(m4):
    assert [truthful_profit(m4, 15, k) for k in range(4)] == pytest.approx([10, 0, 0, 0])
    assert truthful_profit(m4, 0, 0) == 0


@pytest.mark.parametrize("generator, power", [(0, 5), (1, 5), (2, 0), (3, 0)])
def test_single_generator_power(m4, generator, power):
    assert market_power_index(m4, 15, generator) == pytest.approx(power)


@pytest.mark.parametrize(
    "members, power",
    [((0, 1), 20), ((0, 2), 10), ((0, 3), 5), ((1, 2), 10), ((1, 3), 5), ((2, 3), 0)],
)
def test_pair_power(m4, members, power):
    report = coalition_power(m4, 15, members)
    assert report.feasible
    assert report.power == pytest.approx(power)


def test_coalition_power_details(m4):
    report = coalition_power(m4, 15, [1, 0])
    assert report.members == frozenset({0, 1})
    assert report.restricted_cost == pytest.approx(70)


def test_coalition_that_leaves_too_little_capacity(m4):
    report = coalition_power(m4, 15, {0, 1, 2})
    assert not report.feasible
    assert report.power is None


def test_coalition_power_errors(m4):
    with pytest.raises(DomainError):
        coalition_power(m4, 15, [])
    with pytest.raises(DomainError):
        coalition_power(m4, 15, [9])


def test_worked_market_is_supermodular(m4):
    assert check_supermodularity(m4, 15) == []
    assert check_set_supermodularity(m4, 15, 3) == []


def test_shaded_bid_keeps_partial_slot(m4):
    """Generator 2 bidding 2.9 sets the price at 3.9 and earns on its 5 MW."""
    outcome = strategic_profit(m4, 15, 1, 2.9)
    assert outcome.price == pytest.approx(3.9)
    assert outcome.dispatch.outputs[1] == 5
    assert outcome.profit == pytest.approx(4.5)
    assert outcome.bid_profit == pytest.approx(0)
    assert outcome.cost_guise == pytest.approx(4.5)
    assert outcome.settled_profit == pytest.approx(outcome.profit)


def test_cheapest_unit_overbids_into_partial_slot(m4):
    outcome = strategic_profit(m4, 15, 0, 2.5)
    assert outcome.dispatch.x_holder == 0
    assert outcome.profit == pytest.approx(7.5)


def test_truthful_report_earns_benchmark(m4):
    assert strategic_profit(m4, 15, 0, 1.0).profit == pytest.approx(10)


def test_report_must_be_non_negative(m4):
    with pytest.raises(DomainError):
        strategic_profit(m4, 15, 0, -1)


def test_oracle_supremum_not_attained(m4):
    """Profit climbs to 5 as the report approaches 3 and collapses at 3."""
    response = best_response_oracle(m4, 15, 1, grid_step=STEP)
    assert response.sup_profit == pytest.approx(5 - 5 * STEP)
    assert response.sup_gain == response.sup_profit
    assert response.arg_v == pytest.approx(3 - STEP)
    assert not response.attained
    assert response.additional_gain == pytest.approx(5 - 5 * STEP)


def test_oracle_keeps_truthful_report_on_ties(m4):
    response = best_response_oracle(m4, 15, 0, grid_step=STEP)
    assert response.sup_profit == pytest.approx(10)
    assert response.arg_v == 1.0
    assert response.attained
    assert response.additional_gain == pytest.approx(0, abs=1e-9)


def test_oracle_dearest_unit_has_nothing_to_gain(m4):
    response = best_response_oracle(m4, 15, 3, grid_step=STEP)
    assert response.sup_profit == pytest.approx(0, abs=1e-9)
    assert response.arg_v == 4


def test_oracle_errors(m4):
    with pytest.raises(DomainError):
        best_response_oracle(m4, 15, 0, grid_step=0)
    with pytest.raises(InfeasibleDemandError):
        best_response_oracle(m4, 35, 0)


def test_demoted_unit_gains_from_shading(shading_market):
    assert truthful_profit(shading_market, 15, 0) == pytest.approx(1)
    assert strategic_profit(shading_market, 15, 0, 3.0).dispatch.x_holder == 0
    assert strategic_profit(shading_market, 15, 0, 2.0).profit == pytest.approx(6)


def test_oracle_finds_switch_far_above_grid(shading_market):
    """Best report is 19, where running part-loaded ties with the dearest unit."""
    response = best_response_oracle(shading_market, 15, 0, grid_step=STEP)
    assert response.sup_profit == pytest.approx(80, abs=1e-6)
    assert response.arg_v == pytest.approx(19, abs=1e-6)
    assert response.attained
    assert response.additional_gain == pytest.approx(market_power_index(shading_market, 15, 0), abs=1e-6)


@pytest.mark.parametrize(
    "target, expected",
    [(DispatchTarget.PARTIAL, 10), (DispatchTarget.FULL, 15), (DispatchTarget.ZERO, 0), ("x", 10), ("g", 15)],
)
def test_case_supremum(m4, target, expected):
    assert case_supremum(m4, 15, 0, target) == pytest.approx(expected)


def test_case_supremum_errors(m4):
    with pytest.raises(DomainError):
        case_supremum(m4, 5, 0, DispatchTarget.FULL)
    with pytest.raises(DomainError):
        case_supremum(m4, 15, 0, "half")


def test_pair_oracle_bounded_by_pair_power(m4):
    gain = pair_best_response_oracle(m4, 15, 0, 1, grid_step=STEP)
    assert gain == pytest.approx(15, abs=0.2)
    assert gain <= coalition_power(m4, 15, {0, 1}).power
    assert pair_best_response_oracle(m4, 15, 2, 3, grid_step=STEP) == pytest.approx(0, abs=1e-9)


def test_pair_oracle_errors(m4):
    with pytest.raises(DomainError):
        pair_best_response_oracle(m4, 15, 1, 1)
    with pytest.raises(InfeasibleDemandError):
        pair_best_response_oracle(m4, 25, 0, 1)


def test_power_report_without_oracle(m4):
    report = power_report(m4, 15)
    assert report.benchmark_profits == pytest.approx((10, 0, 0, 0))
    assert report.closed_form_power == pytest.approx((5, 5, 0, 0))
    assert report.oracle_power is None
    assert report.equality_rate is None


def test_power_report_with_oracle(m4):
    report = power_report(m4, 15, oracle=True, grid_step=STEP)
    assert report.equality_flags == (False, True, True, True)
    assert report.equality_rate == pytest.approx(0.75)
    assert len(report.oracle_power) == 4


def test_power_report_needs_room_for_exclusion(m4):
    with pytest.raises(InfeasibleDemandError):
        power_report(m4, 35)


@given(markets_with_demand(max_units=6), st.data())
@settings(max_examples=200, deadline=None)
def test_settlement_matches_profit_decomposition(instance, data):
    market, demand = instance
    k = data.draw(st.integers(0, market.n - 1))
    reported = data.draw(st.floats(0.0, 20.0, allow_nan=False))
    outcome = strategic_profit(market, demand, k, reported)
    scale = max(market.full_costs()) * market.n
    assert outcome.profit == pytest.approx(outcome.settled_profit, abs=tolerance(scale) * 10)


@given(markets_with_demand(min_units=2, max_units=8, excluded=1))
@settings(max_examples=200, deadline=None)
def test_single_generator_power_is_non_negative(instance):
    market, demand = instance
    scale = market.n * max(market.full_costs())
    for k in range(market.n):
        assert market_power_index(market, demand, k) >= -tolerance(scale) * 10


@given(markets_with_demand(min_units=2, max_units=8, excluded=2))
@settings(max_examples=150, deadline=None)
def test_pair_power_is_supermodular(instance):
    market, demand = instance
    assert check_supermodularity(market, demand) == []


@given(markets_with_demand(min_units=2, max_units=4, excluded=1), st.data())
@settings(max_examples=30, deadline=None)
def test_oracle_never_below_benchmark(instance, data):
    market, demand = instance
    k = data.draw(st.integers(0, market.n - 1))
    response = best_response_oracle(market, demand, k, grid_step=0.05, max_grid_points=200)
    assert response.additional_gain >= -tolerance(response.benchmark_profit) * 10


@given(markets_with_demand(min_units=2, max_units=4, excluded=1), st.data())
@settings(max_examples=30, deadline=None)
def test_oracle_never_above_closed_form_power(instance, data):
    market, demand = instance
    k = data.draw(st.integers(0, market.n - 1))
    grid_step = 0.05
    response = best_response_oracle(market, demand, k, grid_step=grid_step, max_grid_points=200)
    power = market_power_index(market, demand, k)
    slack = market.capacity * grid_step + tolerance(power, response.additional_gain) * 10
    assert response.additional_gain <= power + slack


def _seeded_oracle_instances(seed, index, trials):
    """Replay the markets the oracle suites of ``chp check`` draw."""
    rng = np.random.default_rng([seed, index])
    for _ in range(trials):
        market = random_market(rng, RandomInstanceConstants.MAX_UNITS_ORACLE, min_units=2)
        yield market, random_demand(rng, market, excluded=1)


def test_under_report_can_be_the_best_response():
    """Seed 42 draws a market where shading the variable cost beats every higher report."""
    matches = [
        (market, demand)
        for market, demand in _seeded_oracle_instances(42, len(GATING_SUITES), 200)
        if market.capacity == pytest.approx(48.08, abs=0.05) and demand == pytest.approx(120.73, abs=0.05)
    ]
    assert len(matches) == 1
    market, demand = matches[0]
    k = next(i for i, g in enumerate(market.generators) if g.variable_cost == pytest.approx(1.156, abs=5e-3))
    true_v = market.generators[k].variable_cost
    grid_step = OracleConstants.DEFAULT_GRID_STEP

    benchmark = truthful_profit(market, demand, k)
    shaded = strategic_profit(market, demand, k, 0.9305).profit
    assert benchmark == pytest.approx(38.69, abs=0.01)
    assert shaded == pytest.approx(44.0, abs=0.02)

    response = best_response_oracle(market, demand, k, grid_step, max_grid_points=1001)
    assert response.arg_v < true_v - grid_step
    assert response.sup_profit == pytest.approx(shaded, abs=0.05)
    power = market_power_index(market, demand, k)
    assert 0 < response.additional_gain <= power + market.capacity * grid_step + tolerance(power)
