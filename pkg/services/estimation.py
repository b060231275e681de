import logging
import time
from typing import Iterable, Iterator, List, Optional, Tuple

import numpy as np

from models.alignment import GapEstimates
from models.channel import Trace
from models.estimation import CoarseResult, FineResult, FineSample, PipelineConfig, PipelineResult
from models.strings import BitString, SeparatedString
from services.alignment import align, align_trajectory
from services.channel import TraceSource, gap_profile, reverse_profile
from services.core import to_bits
from utils.errors import CoarseFailure, FineFailure, LengthMismatch, ParameterError, TEstimateFailure

logger = logging.getLogger(__name__)


def estimate_t(traces: Iterable[Trace], delta: float) -> int:
    """Mean number of ones per trace divided by 1 - delta, rounded"""
    if not 0.0 <= delta < 1.0:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")
    total, count = 0, 0
    for trace in traces:
        total += trace.bits.ones()
        count += 1
    if count == 0:
        raise ParameterError("estimating t needs at least one trace")
    return int(round(total / count / (1.0 - delta)))


def coarse_estimate(trace_source: TraceSource, t: int, cfg: PipelineConfig) -> CoarseResult:
    """Estimate b_0..b_t one run at a time as medians of aligned gaps.

    Each b_m uses ``coarse_reps`` fresh traces aligned against b_0..b_{m-1}.
    Only successful alignments enter the median, and at least
    ``min_success_fraction`` of them must succeed.
    """
    if t < 0:
        raise ParameterError(f"t must be non-negative, got {t}")

    values: List[float] = []
    rates: List[float] = []
    for m in range(t + 1):
        b = GapEstimates(values=tuple(values))
        gaps = []
        for trace in trace_source.draw_many(cfg.coarse_reps):
            outcome = align(gap_profile(trace), m, b, cfg.align_cfg)
            if outcome.success:
                gaps.append(outcome.gap)

        rate = len(gaps) / cfg.coarse_reps
        rates.append(rate)
        if rate < cfg.min_success_fraction:
            logger.error(f"Coarse estimation stalled at m={m}: {len(gaps)}/{cfg.coarse_reps} alignments succeeded")
            raise CoarseFailure(
                f"only {rate:.0%} of {cfg.coarse_reps} alignments succeeded "
                f"(need {cfg.min_success_fraction:.0%}); parameters too aggressive for this instance",
                m,
            )
        values.append(float(np.median(gaps)))

    return CoarseResult(estimates=GapEstimates(values=tuple(values)), success_rates=tuple(rates))


def _accepted_pairs(
    traces: Iterable[Trace], t: int, b: GapEstimates, cfg: PipelineConfig
) -> Iterator[Tuple[int, int, int, int, int]]:
    # One forward and one backward walk per trace serve every m at once
    b_rev = b.reversed()
    for index, trace in enumerate(traces):
        profile = gap_profile(trace)
        forward = align_trajectory(profile, b, cfg.align_cfg)
        backward = align_trajectory(reverse_profile(profile), b_rev, cfg.align_cfg)
        forward_at = {val: q for q, val in enumerate(forward.vals)}
        backward_at = {val: q for q, val in enumerate(backward.vals)}

        for m in range(t + 1):
            q_f = forward_at.get(m)
            q_b = backward_at.get(t - m)
            if q_f is not None and q_b is not None and q_f + q_b == profile.m_tilde:
                yield index, m, q_f, q_b, profile.gaps[q_f]


def iter_fine_samples(
    traces: Iterable[Trace], t: int, b: GapEstimates, cfg: PipelineConfig
) -> Iterator[FineSample]:
    """Accepted forward/backward pairs: q_f + q_b equals the ones in the trace"""
    if len(b) != t + 1:
        raise ParameterError(f"fine estimation needs t+1={t + 1} coarse estimates, got {len(b)}")
    for index, m, q_f, q_b, gap in _accepted_pairs(traces, t, b, cfg):
        yield FineSample(trace_index=index, m=m, q_f=q_f, q_b=q_b, gap=gap)


def fine_estimate(traces: Iterable[Trace], t: int, b: GapEstimates, cfg: PipelineConfig) -> FineResult:
    """Exact gaps a_0..a_t from the mean accepted gap per run, scaled by 1/(1-delta)"""
    if len(b) != t + 1:
        raise ParameterError(f"fine estimation needs t+1={t + 1} coarse estimates, got {len(b)}")

    sums = [0] * (t + 1)
    counts = [0] * (t + 1)
    seen = 0

    def counted(stream: Iterable[Trace]) -> Iterator[Trace]:
        nonlocal seen
        for trace in stream:
            seen += 1
            yield trace

    for _, m, _, _, gap in _accepted_pairs(counted(traces), t, b, cfg):
        sums[m] += gap
        counts[m] += 1

    gaps = []
    for m in range(t + 1):
        if counts[m] == 0:
            logger.error(f"Fine estimation accepted no trace for m={m}")
            raise FineFailure(f"none of {seen} traces passed the forward/backward check", m)
        gaps.append(int(round(sums[m] / counts[m] / (1.0 - cfg.delta))))

    return FineResult(gaps=tuple(gaps), accepted=tuple(counts), traces=seen)


def unpad(gaps: Tuple[int, ...], padding: int) -> SeparatedString:
    recovered = list(gaps)
    if len(recovered) == 1:
        recovered[0] -= 2 * padding
    else:
        recovered[0] -= padding
        recovered[-1] -= padding
    if min(recovered) < 0:
        raise LengthMismatch(f"recovered boundary runs {gaps[0]}, {gaps[-1]} are shorter than the padding {padding}")
    return SeparatedString(gaps=tuple(recovered))


def run_pipeline(
    trace_source: TraceSource,
    cfg: PipelineConfig,
    n: Optional[int] = None,
    t_expected: Optional[int] = None,
) -> PipelineResult:
    """Estimate t, run coarse then fine estimation on padded traces, remove the padding"""
    timings = {}

    started = time.perf_counter()
    t_budget = trace_source.stage("t", cfg.t_traces)
    t = estimate_t(trace_source.draw_many(t_budget), cfg.delta)
    timings["t_estimate"] = time.perf_counter() - started
    logger.info(f"Estimated t={t} from {t_budget} traces")
    if t_expected is not None and t != t_expected:
        logger.error(f"Estimated t={t} but the string has {t_expected} ones")
        raise TEstimateFailure(f"estimated t={t}, expected {t_expected}")

    started = time.perf_counter()
    trace_source.stage("coarse", cfg.coarse_reps * (t + 1))
    coarse = coarse_estimate(trace_source, t, cfg)
    timings["coarse"] = time.perf_counter() - started
    logger.info(f"Coarse estimates done for {t + 1} runs")
    outside = coarse.estimates.out_of_range((1.0 - cfg.delta) * cfg.padding, cfg.align_cfg.n_ref)
    if outside:
        logger.warning(
            f"Coarse estimates at m={list(outside)} fall outside "
            f"[{(1.0 - cfg.delta) * cfg.padding:g}, {cfg.align_cfg.n_ref}]; runs may be shorter than the padding"
        )

    started = time.perf_counter()
    fine_budget = trace_source.stage("fine", cfg.fine_traces)
    fine = fine_estimate(trace_source.draw_many(fine_budget), t, coarse.estimates, cfg)
    timings["fine"] = time.perf_counter() - started
    logger.info(f"Fine estimation done, min acceptance {min(fine.acceptance_rates):.3f}")

    s = unpad(fine.gaps, cfg.padding)
    bits = to_bits(s)
    if n is not None and bits.length != n:
        logger.error(f"Recovered length {bits.length} differs from n={n}")
        raise LengthMismatch(f"recovered {bits.length} bits, expected {n}")

    return PipelineResult(
        bits=bits,
        t=t,
        coarse=coarse,
        fine=fine,
        padded_gaps=fine.gaps,
        timings=timings,
        n_expected=n,
    )


def reconstruct(trace_source: TraceSource, cfg: PipelineConfig, n: Optional[int] = None) -> BitString:
    return run_pipeline(trace_source, cfg, n=n).bits
