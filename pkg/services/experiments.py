import logging
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

import distance
import pandas as pd
from pydantic import ValidationError

from models.channel import ChannelParams
from models.experiment import Aggregate, ExperimentConfig, ExperimentReport, RepetitionRecord
from models.strings import SeparatedString
from services.channel import ChannelTraceSource, padded
from services.core import random_separated, to_bits
from services.estimation import run_pipeline
from services.storage import read_csv, write_csv
from utils.constants import COARSE_TOLERANCE, EDIT_DISTANCE_MAX_LENGTH
from utils.errors import ParameterError, ReconstructionError
from utils.rng import derive_rng, derive_seed
from utils.workers import map_ordered

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "delta",
    "L",
    "c0",
    "n",
    "t",
    "repetitions",
    "successes",
    "success_rate",
    "t_traces",
    "coarse_reps",
    "fine_traces",
    "traces_per_run",
    "cell_seed",
]


def edit_distance(recovered: str, truth: str) -> Optional[int]:
    """Levenshtein distance, computed on what is left after the common prefix and suffix"""
    if recovered == truth:
        return 0
    head = len(os.path.commonprefix([recovered, truth]))
    recovered, truth = recovered[head:], truth[head:]
    tail = len(os.path.commonprefix([recovered[::-1], truth[::-1]]))
    recovered, truth = recovered[: len(recovered) - tail], truth[: len(truth) - tail]
    if max(len(recovered), len(truth)) > EDIT_DISTANCE_MAX_LENGTH:
        return None
    return int(distance.levenshtein(recovered, truth))


def coarse_errors(estimates: Sequence[float], truth: SeparatedString, delta: float) -> List[float]:
    """|b_m - (1-delta) a_m| / sqrt(a_m) for every run"""
    errors = []
    for b_m, a_m in zip(estimates, truth.gaps):
        scale = math.sqrt(a_m) if a_m > 0 else 1.0
        errors.append(abs(b_m - (1.0 - delta) * a_m) / scale)
    return errors


def instance_for(config: ExperimentConfig, seed: int) -> SeparatedString:
    return random_separated(config.n, config.L, config.target_t, derive_rng(seed, "instance"))


def run_repetition(job: Tuple[ExperimentConfig, int]) -> Tuple[RepetitionRecord, Dict[str, float]]:
    config, index = job
    seed = derive_seed(config.master_seed, "repetition", index)
    x = instance_for(config, seed)
    truth = to_bits(x)
    pipeline_cfg = config.pipeline_config()
    source = ChannelTraceSource(x, ChannelParams(delta=config.delta, seed=seed), padding=config.L)

    record = RepetitionRecord(index=index, seed=seed, success=False, t_true=x.t)
    try:
        result = run_pipeline(source, pipeline_cfg, n=x.n, t_expected=x.t)
    except ReconstructionError as e:
        logger.info(f"Repetition {index} failed in {e.stage}: {e.detail}")
        record.failing_stage = e.stage
        record.failing_m = e.m
        return record, {}

    record.t_estimated = result.t
    record.coarse_errors = coarse_errors(result.coarse.estimates.values, padded(x, config.L), config.delta)
    record.coarse_within_tolerance = max(record.coarse_errors) <= COARSE_TOLERANCE
    if not record.coarse_within_tolerance:
        logger.warning(f"Repetition {index}: coarse error {max(record.coarse_errors):.2f} exceeds {COARSE_TOLERANCE:g}")
    record.coarse_success_rates = list(result.coarse.success_rates)
    record.fine_acceptance_rates = list(result.fine.acceptance_rates)
    record.edit_distance = edit_distance(result.bits.bits, truth.bits)
    record.success = result.bits == truth
    if not record.success:
        record.failing_stage = "fine"
    return record, result.timings


def aggregate(records: Sequence[RepetitionRecord]) -> Aggregate:
    successes = sum(1 for r in records if r.success)
    coarse = [e for r in records if r.success for e in r.coarse_errors]
    acceptance = [a for r in records for a in r.fine_acceptance_rates]
    checked = [r.coarse_within_tolerance for r in records if r.coarse_within_tolerance is not None]
    return Aggregate(
        runs=len(records),
        successes=successes,
        success_rate=successes / len(records) if records else 0.0,
        max_coarse_error=max(coarse) if coarse else None,
        coarse_within_tolerance_rate=sum(checked) / len(checked) if checked else None,
        mean_fine_acceptance=sum(acceptance) / len(acceptance) if acceptance else None,
    )


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    results = map_ordered(run_repetition, [(config, i) for i in range(config.repetitions)])
    records = [record for record, _ in results]
    report = ExperimentReport(
        config=config,
        repetitions=records,
        aggregate=aggregate(records),
        timings=[timings for _, timings in results],
    )
    logger.info(f"Experiment finished: {report.aggregate.successes}/{report.aggregate.runs} exact recoveries")
    return report


def sweep_cells(deltas: Sequence[float], Ls: Sequence[int], c0s: Sequence[float]) -> List[Tuple[float, int, float]]:
    return [(delta, L, c0) for delta in deltas for L in Ls for c0 in c0s]


def cell_config(base: ExperimentConfig, delta: float, L: int, c0: float, cell_seed: int) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(
            {**base.model_dump(), "delta": delta, "L": L, "c0": c0, "master_seed": cell_seed}
        )
    except ValidationError as e:
        raise ParameterError(f"invalid sweep cell delta={delta} L={L} c0={c0}: {e.errors()[0]['msg']}")


def _cell_done(done: pd.DataFrame, delta: float, L: int, c0: float) -> bool:
    if done.empty:
        return False
    hit = (done["delta"] == delta) & (done["L"] == L) & (done["c0"] == c0)
    return bool(hit.any())


def run_sweep(
    base: ExperimentConfig,
    deltas: Sequence[float],
    Ls: Sequence[int],
    c0s: Sequence[float],
    out_csv: str,
) -> pd.DataFrame:
    """One CSV row per (delta, L, c0) cell, skipping cells already in out_csv"""
    done = read_csv(out_csv)
    rows = done.to_dict("records") if not done.empty else []

    for index, (delta, L, c0) in enumerate(sweep_cells(deltas, Ls, c0s)):
        if _cell_done(done, delta, L, c0):
            logger.info(f"Skipping finished cell delta={delta} L={L} c0={c0}")
            continue

        cell_seed = derive_seed(base.master_seed, "cell", index)
        config = cell_config(base, delta, L, c0, cell_seed)
        report = run_experiment(config)
        per_run = config.t_traces + config.coarse_reps * (config.target_t + 1) + config.fine_traces
        rows.append(
            {
                "delta": delta,
                "L": L,
                "c0": c0,
                "n": config.n,
                "t": config.target_t,
                "repetitions": config.repetitions,
                "successes": report.aggregate.successes,
                "success_rate": report.aggregate.success_rate,
                "t_traces": config.t_traces,
                "coarse_reps": config.coarse_reps,
                "fine_traces": config.fine_traces,
                "traces_per_run": per_run,
                "cell_seed": cell_seed,
            }
        )
        write_csv(out_csv, pd.DataFrame(rows, columns=SWEEP_COLUMNS))
        logger.info(f"Cell delta={delta} L={L} c0={c0}: success rate {report.aggregate.success_rate:.2f}")

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
