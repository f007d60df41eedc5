"""
Verb handlers of the ``chp`` command line.

Each handler writes its result to ``out`` and returns the exit code.
"""
import argparse
from typing import Callable, Dict, Iterable, List, Optional, TextIO, Tuple

import pandas as pd

from chp_power.core.config.constants import ExitCode, ReportConstants
from chp_power.core.exceptions import UsageError
from chp_power.core.types import Verb
from chp_power.market.analysis import (
    Scenario,
    by_size_frame,
    coalition_stats,
    load_scenario_file,
    rows_frame,
    sweep,
    write_sweep_csv,
)
from chp_power.market.checks import run_checks
from chp_power.market.dispatch import dispatch_oracle, economic_dispatch, restricted_cost
from chp_power.market.pricing import clear_market
from chp_power.market.strategic import check_supermodularity, coalition_power, power_report
from chp_power.utils.logger import ChpLogger
from chp_power.utils.validators import parse_index_list, parse_load_spec

Handler = Callable[[argparse.Namespace, TextIO], int]

# Values this close to zero print as zero, never as -0.000000
_DISPLAY_ZERO = 5e-7


def _number(value: float) -> str:
    if abs(value) < _DISPLAY_ZERO:
        value = 0.0
    return ReportConstants.TABLE_FLOAT_FORMAT.format(value)


def _write_fields(out: TextIO, fields: Iterable[Tuple[str, object]]) -> None:
    for key, value in fields:
        text = _number(value) if isinstance(value, float) else str(value)
        out.write(f"{key}: {text}\n")


def _write_frame(out: TextIO, frame: pd.DataFrame) -> None:
    out.write(frame.to_string(index=False, float_format=_number) + "\n")


def _scenario(args: argparse.Namespace) -> Scenario:
    scenario = load_scenario_file(args.scenario)
    ChpLogger.bind_context(scenario=scenario.label)
    return scenario


def _single_load(args: argparse.Namespace) -> float:
    loads, is_range = parse_load_spec(args.load)
    if is_range:
        raise UsageError(f"'{args.verb}' takes a single load, got range {args.load!r}")
    return loads[0]


def _labels(scenario: Scenario, indices: Iterable[int]) -> str:
    names = [scenario.market.label(k) for k in sorted(indices)]
    return ",".join(names) if names else "none"


def dispatch_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args)
    market = scenario.market
    load = _single_load(args)
    excluded = parse_index_list(args.exclude, market.n)

    solve = dispatch_oracle if args.oracle else economic_dispatch
    result = solve(market, load, excluded)

    _write_fields(
        out,
        [
            ("scenario", scenario.label),
            ("load_mw", load),
            ("excluded", _labels(scenario, excluded)),
            ("marginal_index", result.split.marginal_index),
            ("partial_output_mw", result.split.partial_output),
            ("x_holder", market.label(result.x_holder) if result.x_holder is not None else "none"),
            ("total_cost", result.total_cost),
        ],
    )
    frame = pd.DataFrame(
        {
            "generator": [market.label(k) for k in range(market.n)],
            "output_mw": list(result.outputs),
            "cost": [g.evaluate(q) for g, q in zip(market.generators, result.outputs)],
        }
    )
    _write_frame(out, frame)
    return ExitCode.OK


def price_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args)
    market = scenario.market
    load = _single_load(args)
    result = clear_market(market, load)

    fields: List[Tuple[str, object]] = [
        ("scenario", scenario.label),
        ("load_mw", load),
        ("price", result.price),
        ("marginal_index", result.dispatch.split.marginal_index),
        ("total_uplift", result.total_uplift),
    ]
    if result.degenerate_demand:
        fields.append(("degenerate_demand", "true"))
    _write_fields(out, fields)
    frame = pd.DataFrame(
        {
            "generator": [market.label(k) for k in range(market.n)],
            "output_mw": list(result.dispatch.outputs),
            "desired_output_mw": list(result.desired_outputs),
            "max_profit": list(result.max_profits),
            "uplift": list(result.uplifts),
        }
    )
    _write_frame(out, frame)
    return ExitCode.OK


def power_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args)
    market = scenario.market
    load = _single_load(args)
    if args.grid_step <= 0:
        raise UsageError(f"--grid-step must be positive, got {args.grid_step}")

    report = power_report(market, load, oracle=args.oracle, grid_step=args.grid_step)
    columns: Dict[str, list] = {
        "generator": [market.label(k) for k in range(market.n)],
        "benchmark_profit": list(report.benchmark_profits),
        "closed_form_power": list(report.closed_form_power),
    }
    if report.oracle_power is not None:
        columns["oracle_sup_profit"] = [r.sup_profit for r in report.oracle_power]
        columns["oracle_gain"] = [r.additional_gain for r in report.oracle_power]
        columns["arg_v"] = [r.arg_v for r in report.oracle_power]
        columns["attained"] = [r.attained for r in report.oracle_power]
        columns["equality"] = list(report.equality_flags)

    _write_fields(out, [("scenario", scenario.label), ("load_mw", load)])
    _write_frame(out, pd.DataFrame(columns))
    if report.equality_rate is not None:
        _write_fields(out, [("equality_rate", report.equality_rate)])
    return ExitCode.OK


def coalitions_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args)
    market = scenario.market
    load = _single_load(args)
    restricted_cost(market, load)

    if args.exclude:
        members = parse_index_list(args.exclude, market.n)
        report = coalition_power(market, load, members)
        _write_fields(
            out,
            [
                ("scenario", scenario.label),
                ("load_mw", load),
                ("members", _labels(scenario, members)),
                ("feasible", str(report.feasible).lower()),
            ],
        )
        if report.feasible:
            _write_fields(out, [("restricted_cost", report.restricted_cost), ("power", report.power)])
        return ExitCode.OK

    max_size = args.max_size if args.max_size is not None else scenario.max_coalition
    if max_size < 1:
        raise UsageError(f"--max-size must be >= 1, got {max_size}")
    rows = [coalition_stats(market, load, size) for size in range(1, max_size + 1)]
    frame = rows_frame(rows)
    if args.out:
        frame.to_csv(
            args.out, index=False, float_format=ReportConstants.CSV_FLOAT_FORMAT, lineterminator="\n"
        )

    violations = check_supermodularity(market, load)
    _write_fields(out, [("scenario", scenario.label), ("load_mw", load)])
    _write_frame(out, frame)
    _write_fields(out, [("pair_supermodularity_violations", len(violations))])
    return ExitCode.OK


def sweep_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args)
    loads: Optional[List[float]] = None
    if args.load:
        loads, _ = parse_load_spec(args.load)
    if args.max_size is not None and args.max_size < 1:
        raise UsageError(f"--max-size must be >= 1, got {args.max_size}")

    result = sweep(scenario, loads=loads, max_size=args.max_size)
    fields: List[Tuple[str, object]] = [("scenario", result.label), ("rows", len(result.rows))]

    if args.out:
        path, summary_path = write_sweep_csv(result, args.out)
        fields += [("out", str(path)), ("by_size", str(summary_path))]
        _write_fields(out, fields)
    else:
        _write_fields(out, fields)
        _write_frame(out, rows_frame(result.rows))

    _write_frame(out, by_size_frame(result.by_size))
    if result.trend is not None:
        _write_fields(
            out,
            [
                ("mean_power_slope", result.trend.slope),
                ("mean_power_intercept", result.trend.intercept),
                ("mean_power_r_squared", result.trend.r_squared),
            ],
        )
    _write_fields(
        out,
        [
            ("pct_with_power_non_decreasing", str(result.pct_non_decreasing).lower()),
            ("mean_power_non_decreasing", str(result.mean_non_decreasing).lower()),
        ],
    )
    return ExitCode.OK


def check_command(args: argparse.Namespace, out: TextIO) -> int:
    scenario = _scenario(args) if args.scenario else None
    if args.trials is not None and args.trials < 1:
        raise UsageError(f"--trials must be >= 1, got {args.trials}")
    ChpLogger.bind_context(seed=args.seed)

    report = run_checks(trials=args.trials, seed=args.seed, scenario=scenario)
    frame = pd.DataFrame(
        {
            "suite": [s.name for s in report.suites],
            "kind": ["gating" if s.gating else "diagnostic" for s in report.suites],
            "trials": [s.trials for s in report.suites],
            "passed": [s.passed for s in report.suites],
            "failed": [s.failed for s in report.suites],
        }
    )
    trials = report.trials if report.trials is not None else "per_suite"
    _write_fields(out, [("seed", report.seed), ("trials", trials)])
    _write_frame(out, frame)
    if report.equality_rate is not None:
        _write_fields(out, [("closed_form_equality_rate", report.equality_rate)])
    _write_fields(out, [("result", "PASS" if report.ok else "FAIL")])
    return ExitCode.OK if report.ok else ExitCode.DOMAIN_ERROR


COMMANDS: Dict[Verb, Handler] = {
    Verb.DISPATCH: dispatch_command,
    Verb.PRICE: price_command,
    Verb.POWER: power_command,
    Verb.COALITIONS: coalitions_command,
    Verb.SWEEP: sweep_command,
    Verb.CHECK: check_command,
}
