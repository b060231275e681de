import argparse
import functools
import logging
import sys
from typing import Any, Callable, Dict, Optional

from pydantic import ValidationError

from models.alignment import LogBase
from models.experiment import ExperimentConfig
from services.storage import read_json
from utils.constants import EXIT_OK
from utils.errors import ParameterError, SeptraceError

logger = logging.getLogger(__name__)

# CLI flag dest -> ExperimentConfig field
_CONFIG_FLAGS = {
    "n": "n",
    "L": "L",
    "t": "t",
    "density": "density",
    "delta": "delta",
    "seed": "master_seed",
    "coarse_reps": "coarse_reps",
    "traces": "fine_traces",
    "t_traces": "t_traces",
    "c0": "c0",
    "log_base": "log_base",
    "n_ref": "n_ref",
    "min_success": "min_success_fraction",
    "repetitions": "repetitions",
}


def handles_errors(handler: Callable[[argparse.Namespace], int]) -> Callable[[argparse.Namespace], int]:
    """Turn SeptraceError into a stderr message and its exit code"""

    @functools.wraps(handler)
    def wrapper(args: argparse.Namespace) -> int:
        try:
            code = handler(args)
            return EXIT_OK if code is None else code
        except SeptraceError as e:
            logger.error(f"{args.command} failed: {e.detail}")
            print(f"error: {e.detail}", file=sys.stderr)
            return e.exit_code

    return wrapper


def add_instance_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--n", type=int, help="string length")
    parser.add_argument("--L", type=int, help="minimum interior run of zeros")
    ones = parser.add_mutually_exclusive_group()
    ones.add_argument("--t", type=int, help="number of ones")
    ones.add_argument("--density", type=float, help="ones per bit, used when --t is absent")
    parser.add_argument("--seed", type=int, help="master seed")


def add_pipeline_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--delta", type=float, help="deletion probability")
    parser.add_argument("--traces", type=int, help="traces for fine estimation")
    parser.add_argument("--t-traces", dest="t_traces", type=int, help="traces for estimating t")
    parser.add_argument("--coarse-reps", dest="coarse_reps", type=int, help="traces per coarse estimate")
    parser.add_argument("--c0", type=float, help="alignment threshold constant")
    parser.add_argument("--log-base", dest="log_base", choices=[b.value for b in LogBase], help="log base of the threshold")
    parser.add_argument("--n-ref", dest="n_ref", type=int, help="n used inside log n (default: padded length)")
    parser.add_argument("--min-success", dest="min_success", type=float, help="coarse alignment quorum")


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {}
    for dest, field in _CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[field] = value
    # --t and --density are alternatives; the flag given wins over the file
    if "t" in overrides:
        overrides.setdefault("density", None)
    elif "density" in overrides:
        overrides["t"] = None
    return overrides


def experiment_config(args: argparse.Namespace, **extra) -> ExperimentConfig:
    """--config file (if any) with command-line flags layered on top"""
    base: Dict[str, Any] = {}
    config_path: Optional[str] = getattr(args, "config", None)
    if config_path:
        base = read_json(config_path, ExperimentConfig).model_dump()

    merged = {**base, **flag_overrides(args), **{k: v for k, v in extra.items() if v is not None}}
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise ParameterError(f"invalid experiment configuration: {_first_error(e)}")


def _first_error(e: ValidationError) -> str:
    err = e.errors()[0]
    where = ".".join(str(part) for part in err.get("loc", ())) or "config"
    return f"{where}: {err.get('msg', 'invalid value')}"
