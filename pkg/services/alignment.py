import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from models.alignment import (
    AlignConfig,
    AlignOutcome,
    AlignTrajectory,
    GapEstimates,
    LogBase,
    Position,
    PositionKind,
    ProcessRun,
)
from models.channel import TraceGapProfile
from services.core import PrefixSums
from utils.constants import NEVER_AHEAD_FACTOR
from utils.errors import ParameterError

logger = logging.getLogger(__name__)


def log_n(cfg: AlignConfig) -> float:
    if cfg.log_base == LogBase.BASE2:
        return math.log2(cfg.n_ref)
    return math.log(cfg.n_ref)


def threshold_factor(cfg: AlignConfig) -> float:
    return cfg.c0 * log_n(cfg)


def threshold(b_sum: float, cfg: AlignConfig) -> float:
    if b_sum < 0:
        raise ParameterError(f"threshold needs a non-negative sum, got {b_sum}")
    return threshold_factor(cfg) * math.sqrt(b_sum)


def next_alignment(s: float, val: int, prefix: Sequence[float], factor: float) -> Optional[int]:
    """Smallest j' > val such that some val <= j < j' has |s - b_{j:j'}| <= factor * sqrt(b_{j:j'})"""
    size = len(prefix) - 1
    for j_end in range(val + 1, size + 1):
        top = prefix[j_end]
        for j in range(j_end - 1, val - 1, -1):
            total = top - prefix[j]
            root = math.sqrt(total)
            slack = factor * root
            if abs(s - total) <= slack:
                return j_end
            # total - factor*sqrt(total) only grows from here on, so no larger window can match
            if root >= factor / 2 and total - slack > s:
                break
    return None


def align_trajectory(
    profile: TraceGapProfile,
    b: GapEstimates,
    cfg: AlignConfig,
    stop: Optional[int] = None,
) -> AlignTrajectory:
    """Run Align's steps over the trace ones, recording `val` after each.

    Steps only ever land on real ones (q <= m~), so a step that would
    consume the trailing run is never taken. With ``stop`` the walk ends as
    soon as val reaches it.
    """
    factor = threshold_factor(cfg)
    prefix = b.prefix
    vals = [0]
    val = 0
    for q in range(profile.m_tilde):
        if stop is not None and val >= stop:
            break
        nxt = next_alignment(profile.gaps[q], val, prefix, factor)
        if nxt is None:
            return AlignTrajectory(vals=tuple(vals), failed=True)
        val = nxt
        vals.append(val)
    return AlignTrajectory(vals=tuple(vals))


def align(profile: TraceGapProfile, m: int, b: GapEstimates, cfg: AlignConfig) -> AlignOutcome:
    """Find the one of the trace aligned to the m-th one of x.

    Returns its index q among the trace ones and the gap r_{q+1} - r_q - 1
    after it, or FAIL when the walk finds no match or overshoots m.
    """
    if m < 0:
        raise ParameterError(f"m must be non-negative, got {m}")
    if len(b) < m:
        raise ParameterError(f"align needs at least m={m} gap estimates, got {len(b)}")
    if m == 0:
        return AlignOutcome.found(0, profile.gaps[0])

    trajectory = align_trajectory(profile, b, cfg, stop=m)
    q = trajectory.position_of(m)
    if q is None:
        return AlignOutcome.fail()
    return AlignOutcome.found(q, profile.gaps[q])


def process_values(a: Sequence[int], b: GapEstimates, w: Sequence[int], cfg: AlignConfig) -> Dict[int, Optional[int]]:
    """f_i for every retained i of the pattern w, with exact run sums of a"""
    factor = threshold_factor(cfg)
    prefix = b.prefix
    sums = PrefixSums(a)

    f: Dict[int, Optional[int]] = {0: 0}
    prev, current = 0, 0
    for i in range(1, len(w)):
        if not w[i]:
            continue
        if current is not None:
            current = next_alignment(sums.sum(prev, i), current, prefix, factor)
        f[i] = current
        prev = i
    return f


def simulate_process(
    a: Sequence[int],
    b: GapEstimates,
    delta: float,
    cfg: AlignConfig,
    rng: np.random.Generator,
    w: Optional[Sequence[int]] = None,
) -> ProcessRun:
    """Sample w_1..w_{m-1} ~ Bernoulli(1 - delta) (w_0 = w_m = 1) and compute f.

    Pass ``w`` to replay a recorded pattern instead of sampling one.
    """
    if not a:
        raise ParameterError("the process needs at least one run")
    if any(v < 0 for v in a):
        raise ParameterError("run lengths must be non-negative")
    m = len(a)
    if w is None:
        inner = (rng.random(m - 1) >= delta).astype(int).tolist()
        w = (1, *inner, 1)
    elif len(w) != m + 1:
        raise ParameterError(f"pattern must have m+1={m + 1} entries, got {len(w)}")

    w = tuple(int(bit) for bit in w)
    return ProcessRun(w=w, f=process_values(a, b, w, cfg))


def classify(run: ProcessRun, m: int) -> Position:
    final = run.f.get(m)
    if m not in run.f or final is None:
        return Position(kind=PositionKind.FAILED)
    if final == m:
        return Position(kind=PositionKind.EXACT)
    if final < m:
        return Position(kind=PositionKind.BEHIND, steps=m - final)
    return Position(kind=PositionKind.AHEAD, steps=final - m)


def ever_ahead(run: ProcessRun) -> bool:
    return any(v is not None and v > i for i, v in run.f.items())


def max_relative_behind(run: ProcessRun) -> int:
    """max over retained i <= i' of (i' - i) - (f_{i'} - f_i)"""
    worst = 0
    best_lead = None
    for i, v in sorted(run.f.items()):
        if v is None:
            break
        lead = v - i
        if best_lead is not None:
            worst = max(worst, best_lead - lead)
        best_lead = lead if best_lead is None else max(best_lead, lead)
    return worst


def never_ahead_bound(b_i: float, cfg: AlignConfig) -> float:
    """(c0/4) * sqrt(b_i * log n)"""
    return NEVER_AHEAD_FACTOR * cfg.c0 * math.sqrt(b_i * log_n(cfg))


def perturb_within(b: Sequence[int], cfg: AlignConfig, rng: np.random.Generator) -> List[int]:
    """Run lengths a with |a_i - b_i| <= (c0/4) * sqrt(b_i * log n)"""
    a = []
    for b_i in b:
        offset = int(rng.uniform(-1.0, 1.0) * never_ahead_bound(b_i, cfg))
        a.append(max(0, int(b_i) + offset))
    return a
