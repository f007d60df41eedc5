"""
Entry point of the ``chp`` command line.
"""
import argparse
import sys
from typing import List, NoReturn, Optional, Sequence

from chp_power.core.config.constants import AppConstants, OracleConstants
from chp_power.core.exceptions import ChpError, UsageError, handle_exception
from chp_power.core.types import Verb
from chp_power.cli import commands
from chp_power.utils.logger import ChpLogger, get_logger

logger = get_logger(__name__)


class ChpArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so run() owns the exit code."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _add_scenario(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--scenario", required=required, help="Scenario JSON file")


def _add_load(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--load", required=required, help="Load in MW, or min:max:step")


def build_parser() -> argparse.ArgumentParser:
    parser = ChpArgumentParser(prog=AppConstants.CLI_NAME, description=AppConstants.APP_DESCRIPTION)
    verbs = parser.add_subparsers(dest="verb", required=True, parser_class=ChpArgumentParser)

    dispatch = verbs.add_parser(Verb.DISPATCH.value, help="Economic dispatch c(y) or c^A(y)")
    _add_scenario(dispatch)
    _add_load(dispatch)
    dispatch.add_argument("--exclude", help="Comma list of 1-based generators barred from producing")
    dispatch.add_argument("--oracle", action="store_true", help="Solve by exhaustive enumeration")

    price = verbs.add_parser(Verb.PRICE.value, help="Convex hull price and uplift payments")
    _add_scenario(price)
    _add_load(price)

    power = verbs.add_parser(Verb.POWER.value, help="Benchmark profits and market power indices")
    _add_scenario(power)
    _add_load(power)
    power.add_argument("--oracle", action="store_true", help="Also run the best-response oracle")
    power.add_argument("--grid-step", type=float, default=OracleConstants.DEFAULT_GRID_STEP)

    coalitions = verbs.add_parser(Verb.COALITIONS.value, help="Coalition market power at one load")
    _add_scenario(coalitions)
    _add_load(coalitions)
    coalitions.add_argument("--exclude", help="Comma list of 1-based coalition members")
    coalitions.add_argument("--max-size", type=int, help="Largest coalition size")
    coalitions.add_argument("--out", help="Write the per-size rows as CSV")

    sweep = verbs.add_parser(Verb.SWEEP.value, help="Coalition statistics over the load range")
    _add_scenario(sweep)
    _add_load(sweep, required=False)
    sweep.add_argument("--max-size", type=int, help="Largest coalition size")
    sweep.add_argument("--out", help="CSV path; per-size aggregates go next to it")

    check = verbs.add_parser(Verb.CHECK.value, help="Randomized property suites")
    _add_scenario(check, required=False)
    check.add_argument("--trials", type=int, help="Instances for every suite (default: each suite's own count)")
    check.add_argument("--seed", type=int, help="Seed of the suites")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Execute one verb; returns the process exit code."""
    parser = build_parser()
    arguments: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        try:
            args = parser.parse_args(arguments)
        except SystemExit as e:
            # --help
            return int(e.code or 0)
        verb = Verb(args.verb)
        ChpLogger.bind_context(verb=verb.value)
        logger.debug("command_started", argv=arguments)
        return int(commands.COMMANDS[verb](args, sys.stdout))
    except ChpError as e:
        logger.debug("command_failed", **e.to_dict())
        print(e.to_line(), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        error = handle_exception(e)
        logger.error("command_crashed", error_type=type(e).__name__, exc_info=e)
        print(error.to_line(), file=sys.stderr)
        return error.exit_code
    finally:
        ChpLogger.clear_context()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
