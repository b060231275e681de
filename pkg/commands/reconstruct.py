import argparse
import logging
from pathlib import Path
from typing import Optional

from commands.common import add_instance_flags, add_pipeline_flags, experiment_config, handles_errors
from models.alignment import AlignConfig, LogBase
from models.estimation import PipelineConfig
from models.experiment import ReconstructionReport
from services.channel import FileTraceSource
from services.estimation import run_pipeline
from services.experiments import edit_distance, run_experiment
from services.storage import read_string, read_traces, write_json, write_string
from utils.constants import DEFAULT_C0, DEFAULT_COARSE_REPS, DEFAULT_MIN_SUCCESS_FRACTION, EXIT_ALGORITHM_FAILURE
from utils.errors import ParameterError, ReconstructionError

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("reconstruct", help="recover a string from its traces")
    parser.add_argument("trace_file", nargs="?", help="trace file; omit to simulate traces live")
    add_instance_flags(parser)
    add_pipeline_flags(parser)
    parser.add_argument("--repetitions", type=int, help="live mode: independent seeded runs")
    parser.add_argument("--reference", help="string file the result must equal")
    parser.add_argument("--out", help="recovered string file (file mode) or output directory (live mode)")
    parser.add_argument("--report", help="report JSON path")
    parser.set_defaults(handler=cmd_reconstruct)


@handles_errors
def cmd_reconstruct(args: argparse.Namespace) -> int:
    if args.trace_file:
        return _from_file(args)
    return _live(args)


def _report_path(args: argparse.Namespace, default: Optional[Path]) -> Optional[Path]:
    if args.report:
        return Path(args.report)
    return default


def _from_file(args: argparse.Namespace) -> int:
    """The header's delta is used and budgets default to the traces in the file.

    Traces without a ``pad=`` header field are padded on the fly with ``--L``
    zeros. Coarse and fine estimation read disjoint slices of the file.
    """
    header, traces = read_traces(args.trace_file)
    if args.delta is not None and args.delta != header.delta:
        logger.warning(f"Ignoring --delta={args.delta}; the trace header says delta={header.delta}")

    if header.pad is not None:
        padding, pad_on_the_fly = header.pad, 0
    else:
        padding = args.L if args.L is not None else 0
        pad_on_the_fly = padding

    n_ref = args.n_ref if args.n_ref is not None else max(2, header.n + 2 * padding)
    try:
        cfg = PipelineConfig(
            align_cfg=AlignConfig(
                c0=args.c0 if args.c0 is not None else DEFAULT_C0,
                n_ref=n_ref,
                log_base=LogBase(args.log_base) if args.log_base else LogBase.NATURAL,
            ),
            delta=header.delta,
            coarse_reps=args.coarse_reps or DEFAULT_COARSE_REPS,
            fine_traces=args.traces or len(traces),
            t_traces=args.t_traces or len(traces),
            min_success_fraction=args.min_success or DEFAULT_MIN_SUCCESS_FRACTION,
            padding=padding,
        )
    except ValueError as e:
        raise ParameterError(f"invalid pipeline settings: {e}")

    seed = args.seed if args.seed is not None else header.seed
    source = FileTraceSource(traces, header.delta, seed, padding=pad_on_the_fly)
    reference = read_string(args.reference) if args.reference else None

    report = ReconstructionReport(trace_file=str(args.trace_file), header=header, pipeline=cfg, success=False)
    try:
        result = run_pipeline(source, cfg, n=header.n)
    except ReconstructionError as e:
        _record_traces(report, source)
        report.failing_stage = e.stage
        report.failing_m = e.m
        _write_report(report, _report_path(args, _default_report(args)))
        raise

    _record_traces(report, source)
    report.success = True
    report.t_estimated = result.t
    report.recovered_n = result.bits.length
    report.coarse_estimates = list(result.coarse.estimates.values)
    report.coarse_success_rates = list(result.coarse.success_rates)
    report.fine_acceptance_rates = list(result.fine.acceptance_rates)
    report.timings = result.timings

    if args.out:
        write_string(args.out, result.bits)
    else:
        print(result.bits.bits)

    code = 0
    if reference is not None:
        report.matches_reference = result.bits == reference
        report.edit_distance = edit_distance(result.bits.bits, reference.bits)
        if not report.matches_reference:
            logger.error(f"Recovered string differs from {args.reference} (edit distance {report.edit_distance})")
            code = EXIT_ALGORITHM_FAILURE

    _write_report(report, _report_path(args, _default_report(args)))
    return code


def _record_traces(report: ReconstructionReport, source: FileTraceSource):
    report.stage_traces = {stage: len(indices) for stage, indices in source.used.items()}
    report.traces_reused = source.reused


def _default_report(args: argparse.Namespace) -> Optional[Path]:
    return Path(args.out + ".report.json") if args.out else None


def _write_report(report, path: Optional[Path]):
    if path is not None:
        write_json(path, report)
        logger.info(f"Report written to {path}")


def _live(args: argparse.Namespace) -> int:
    config = experiment_config(args, out_dir=args.out)
    if args.reference:
        logger.warning("--reference only applies to trace files; live runs compare against the simulated string")

    report = run_experiment(config)
    default = Path(config.out_dir) / "report.json" if config.out_dir else None
    path = _report_path(args, default)
    if path is not None:
        write_json(path, report)
        logger.info(f"Report written to {path}")
    else:
        print(report.science_json())

    if report.aggregate.successes < report.aggregate.runs:
        return EXIT_ALGORITHM_FAILURE
    return 0
