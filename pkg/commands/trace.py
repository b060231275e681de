import argparse
import logging

from commands.common import handles_errors
from models.channel import ChannelParams
from models.experiment import TraceFileHeader
from services.channel import ChannelTraceSource
from services.core import from_bits
from services.storage import read_string, write_traces
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("trace", help="sample traces of a string through the deletion channel")
    parser.add_argument("--string", required=True, help="string file to transmit")
    parser.add_argument("--delta", type=float, required=True, help="deletion probability")
    parser.add_argument("--traces", type=int, default=1, help="number of traces to write")
    parser.add_argument("--seed", type=int, default=0, help="channel seed")
    parser.add_argument("--padded", action="store_true", help="pad each trace with Bin(L, 1-delta) zeros at both ends")
    parser.add_argument("--L", type=int, help="padding length, required with --padded")
    parser.add_argument("--out", required=True, help="trace file to write")
    parser.set_defaults(handler=cmd_trace)


@handles_errors
def cmd_trace(args: argparse.Namespace) -> int:
    if args.traces < 0:
        raise ParameterError(f"--traces must be non-negative, got {args.traces}")
    if args.padded and (args.L is None or args.L < 0):
        raise ParameterError("--padded needs a non-negative --L")
    if not 0.0 <= args.delta < 1.0:
        raise ParameterError(f"delta must lie in [0, 1), got {args.delta}")
    if args.seed < 0:
        raise ParameterError(f"--seed must be non-negative, got {args.seed}")

    x = from_bits(read_string(args.string))
    padding = args.L if args.padded else 0
    source = ChannelTraceSource(x, ChannelParams(delta=args.delta, seed=args.seed), padding=padding)
    header = TraceFileHeader(
        n=x.n,
        delta=args.delta,
        seed=args.seed,
        count=args.traces,
        pad=padding if args.padded else None,
    )
    write_traces(args.out, header, (trace.bits for trace in source.draw_many(args.traces)))
    logger.info(f"Wrote {args.traces} traces of an n={x.n} string at delta={args.delta}")
    return 0
