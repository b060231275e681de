import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from commands import gen, reconstruct, sweep, trace, validate
from utils.constants import DEFAULT_LOG_LEVEL, LOG_LEVEL_ENV

logger = logging.getLogger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="septrace",
        description="Trace reconstruction of L-separated strings under the deletion channel",
    )
    env_level = os.getenv(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
    parser.add_argument(
        "--log-level",
        dest="log_level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=env_level if env_level in LOG_LEVELS else DEFAULT_LOG_LEVEL,
    )
    parser.add_argument("--config", help="ExperimentConfig JSON; flags override its fields")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (gen, trace, reconstruct, sweep, validate):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(args.log_level)
    logger.debug(f"Running {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
