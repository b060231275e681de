import argparse
import logging

from commands.common import add_instance_flags, add_pipeline_flags, experiment_config, handles_errors
from services.experiments import run_sweep

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("sweep", help="success rate over a grid of delta, L and c0")
    add_instance_flags(parser)
    add_pipeline_flags(parser)
    parser.add_argument("--repetitions", type=int, help="runs per grid cell")
    parser.add_argument("--deltas", type=float, nargs="+", required=True, help="deletion probabilities")
    parser.add_argument("--Ls", type=int, nargs="+", help="separations (default: --L)")
    parser.add_argument("--c0s", type=float, nargs="+", help="threshold constants (default: --c0)")
    parser.add_argument("--out", required=True, help="CSV file; finished cells already in it are skipped")
    parser.set_defaults(handler=cmd_sweep)


@handles_errors
def cmd_sweep(args: argparse.Namespace) -> int:
    base = experiment_config(args, delta=args.deltas[0])
    Ls = args.Ls or [base.L]
    c0s = args.c0s or [base.c0]

    table = run_sweep(base, args.deltas, Ls, c0s, args.out)
    logger.info(f"Sweep table {args.out} has {len(table)} cells")
    return 0
