import argparse
import logging

from commands.common import handles_errors
from models.experiment import ValidationOptions
from services.storage import write_json
from services.validation import DEFAULT_SUITES, SUITES, run_suites
from utils.constants import EXIT_ALGORITHM_FAILURE
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("validate", help="run invariant and oracle self-checks")
    parser.add_argument(
        "suite",
        nargs="?",
        choices=list(SUITES) + ["all"],
        help="suite to run (default: all, or string when --string is given)",
    )
    parser.add_argument("--runs", type=int, help="Monte Carlo budget of the suite")
    parser.add_argument("--delta", type=float, help="deletion probability to test at")
    parser.add_argument("--seed", type=int, default=0, help="seed of the suite's random streams")
    parser.add_argument("--string", dest="string_path", help="string file to check for separation")
    parser.add_argument("--L", type=int, help="separation the string must have")
    parser.add_argument("--out", help="write the report JSON here")
    parser.set_defaults(handler=cmd_validate)


@handles_errors
def cmd_validate(args: argparse.Namespace) -> int:
    suite = args.suite or ("string" if args.string_path else "all")
    names = DEFAULT_SUITES if suite == "all" else [suite]
    try:
        options = ValidationOptions(
            runs=args.runs,
            delta=args.delta,
            seed=args.seed,
            string_path=args.string_path,
            L=args.L,
        )
    except ValueError as e:
        raise ParameterError(f"invalid validation options: {e}")

    report = run_suites(names, options)
    if args.out:
        write_json(args.out, report)
    else:
        print(report.model_dump_json(indent=2))

    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        logger.error(f"Validation failed: {', '.join(failed)}")
        return EXIT_ALGORITHM_FAILURE
    return 0
