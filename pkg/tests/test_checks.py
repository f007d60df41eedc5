"""Tests for the randomized property suites."""
import numpy as np
import pytest

from chp_power.core.config.constants import RandomInstanceConstants
from chp_power.market.checks import GATING_SUITES, random_demand, random_market, run_checks, suite_trials


@pytest.fixture(scope="module")
def report():
    return run_checks(trials=5, seed=42)


def test_random_instances_respect_bounds():
    rng = np.random.default_rng(7)
    for _ in range(50):
        market = random_market(rng, max_units=5, min_units=2)
        assert 2 <= market.n <= 5
        demand = random_demand(rng, market, excluded=1)
        assert 0 < demand <= (market.n - 1) * market.capacity


def test_every_gating_suite_passes(report):
    gating = {s.name: s for s in report.suites if s.gating}
    assert set(gating) == {name for name, _ in GATING_SUITES} | {"oracle_lower_bound", "closed_form_dominance"}
    assert all(s.failed == 0 for s in gating.values())
    assert report.ok


def test_report_shape(report):
    assert report.seed == 42
    assert report.trials == 5
    assert all(s.trials == 5 for s in report.suites)
    assert all(s.passed + s.failed == s.trials for s in report.suites)
    assert 0 <= report.equality_rate <= 1


def test_diagnostics_never_fail_the_run(report):
    diagnostics = [s for s in report.suites if not s.gating]
    assert {s.name for s in diagnostics} == {
        "under_reporting",
        "closed_form_equality",
        "set_supermodularity",
    }
    assert all(s.ok for s in diagnostics)


def test_same_seed_same_report(report):
    assert run_checks(trials=5, seed=42) == report


def test_scenario_suite(scenario_dir):
    from chp_power.market.analysis import load_scenario_file

    scenario = load_scenario_file(scenario_dir / "m4.json")
    result = run_checks(trials=2, seed=1, scenario=scenario)
    suite = result.suites[-1]
    assert suite.name == "pair_supermodularity_scenario"
    assert suite.gating
    assert suite.trials == 1
    assert suite.failed == 0


def test_suite_trials_default_per_suite():
    assert suite_trials("dispatch_oracle_equivalence") == 500
    assert suite_trials("marginal_cost_bounds") == 500
    assert suite_trials("pair_supermodularity") == 500
    assert suite_trials("uplift_minimality") == 200
    assert suite_trials("oracle") == 200
    assert suite_trials("oracle", override=7) == 7


def test_every_suite_has_a_default_count():
    names = {name for name, _ in GATING_SUITES} | {"oracle", "set_supermodularity"}
    assert names == set(RandomInstanceConstants.SUITE_TRIALS)


def test_settings_override_every_suite(settings_override):
    settings_override(DEFAULT_TRIALS=3)
    result = run_checks(seed=5)
    assert result.trials == 3
    assert all(s.trials == 3 for s in result.suites)
