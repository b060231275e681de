import argparse
import logging

from commands.common import add_instance_flags, experiment_config, handles_errors
from models.experiment import StringMetadata
from services.core import random_separated, to_bits
from services.storage import write_string
from utils.rng import derive_rng

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("gen", help="generate a random L-separated string")
    add_instance_flags(parser)
    parser.add_argument("--out", required=True, help="string file to write (metadata goes to <out>.json)")
    parser.set_defaults(handler=cmd_gen)


@handles_errors
def cmd_gen(args: argparse.Namespace) -> int:
    config = experiment_config(args)

    x = random_separated(config.n, config.L, config.target_t, derive_rng(config.master_seed, "instance"))
    metadata = StringMetadata(n=x.n, L=config.L, t=x.t, seed=config.master_seed, gaps=list(x.gaps))
    write_string(args.out, to_bits(x), metadata)
    logger.info(f"Generated n={x.n} t={x.t} L={config.L} string with seed {config.master_seed}")
    return 0
