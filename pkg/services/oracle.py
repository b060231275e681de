import logging
import math
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple, Union

from models.alignment import AlignConfig, GapEstimates
from models.oracle import BehindDistribution, OracleConfig, PkBoundReport, PkBoundRow
from services.alignment import next_alignment, threshold_factor
from services.core import PrefixSums
from utils.constants import WORST_CASE_DELTA
from utils.errors import InstanceTooLarge, ParameterError

logger = logging.getLogger(__name__)

Number = Union[float, int, str, Fraction]


def as_fraction(delta: Number) -> Fraction:
    """Exact rational for delta; floats go through their decimal repr (0.001 -> 1/1000)"""
    if isinstance(delta, Fraction):
        return delta
    if isinstance(delta, float):
        return Fraction(repr(delta))
    return Fraction(delta)


def _position_label(final, m: int) -> str:
    if final is None:
        return "failed"
    if final == m:
        return "exact"
    if final < m:
        return f"behind:{m - final}"
    return f"ahead:{final - m}"


def enumerate_outcomes(
    a: Sequence[int],
    b: GapEstimates,
    delta: Number,
    cfg: AlignConfig,
    ocfg: OracleConfig,
) -> BehindDistribution:
    """Exact outcome probabilities over all 2^(m-1) retention patterns.

    Outcomes are tallied per number of deleted ones, then weighted with exact
    rational powers of delta.
    """
    m = len(a)
    if m < 1:
        raise ParameterError("enumeration needs at least one run")
    if m > ocfg.max_m:
        raise InstanceTooLarge(f"m={m} exceeds the enumeration cap max_m={ocfg.max_m}")

    d = as_fraction(delta)
    if not 0 <= d < 1:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")

    K = ocfg.window_for(m)
    factor = threshold_factor(cfg)
    prefix = b.prefix
    sums = PrefixSums(a)

    # label -> deleted count -> number of patterns
    tallies: Dict[str, Dict[int, int]] = defaultdict(lambda: defaultdict(int))
    windowed: Dict[int, Dict[int, int]] = defaultdict(lambda: defaultdict(int))

    def step(prev: int, current, i: int):
        if current is None:
            return None
        return next_alignment(sums.sum(prev, i), current, prefix, factor)

    def visit(i: int, prev: int, current, deleted: int, best_lead: int, window_ok: bool):
        if i == m:
            final = step(prev, current, m)
            tallies[_position_label(final, m)][deleted] += 1
            if final is not None and final <= m:
                ok = window_ok and best_lead - (final - m) <= K
                if ok:
                    for k in range(m - final + 1):
                        windowed[k][deleted] += 1
            return

        visit(i + 1, prev, current, deleted + 1, best_lead, window_ok)

        f_i = step(prev, current, i)
        if f_i is None:
            visit(i + 1, i, None, deleted, best_lead, window_ok)
            return
        lead = f_i - i
        visit(i + 1, i, f_i, deleted, max(best_lead, lead), window_ok and best_lead - lead <= K)

    visit(1, 0, 0, 0, 0, True)

    free = m - 1
    weights = [d**z * (1 - d) ** (free - z) for z in range(free + 1)]

    def weigh(counts: Dict[int, int]) -> Fraction:
        return sum((weights[z] * c for z, c in counts.items()), Fraction(0))

    probs = {label: weigh(counts) for label, counts in sorted(tallies.items())}
    p_k = {k: weigh(windowed.get(k, {})) for k in range(m + 1)}
    return BehindDistribution(m=m, k_window=K, probs=probs, p_k=p_k)


def check_window_zero(dist: BehindDistribution) -> bool:
    """p_k vanishes for every k beyond the window K"""
    return all(p == 0 for k, p in dist.p_k.items() if k > dist.k_window)


def catalan(k: int) -> int:
    if not 0 <= k <= 64:
        raise ParameterError(f"catalan is defined here for 0 <= k <= 64, got {k}")
    return math.comb(2 * k, k) // (k + 1)


def d_k(k: int) -> int:
    """D_0 = 1, D_k = 100^(2k-1) * C_k"""
    if not 0 <= k <= 32:
        raise ParameterError(f"D_k is defined here for 0 <= k <= 32, got {k}")
    if k == 0:
        return 1
    return 100 ** (2 * k - 1) * catalan(k)


def check_pk_bound(
    a: Sequence[int],
    b: GapEstimates,
    delta: Number,
    cfg: AlignConfig,
    ocfg: OracleConfig,
) -> PkBoundReport:
    """Compare exact p_k against D_k * delta^k for every k the instance allows"""
    dist = enumerate_outcomes(a, b, delta, cfg, ocfg)
    d = as_fraction(delta)
    claimed = d <= Fraction(1, 3 * 10**6)
    if not claimed:
        logger.info(f"delta={float(d)} is above {WORST_CASE_DELTA:.3e}; the p_k bound is informational here")

    rows = []
    for k, p in sorted(dist.p_k.items()):
        if k > 32:
            break
        bound = d_k(k) * d**k
        rows.append(
            PkBoundRow(k=k, p_k=float(p), p_k_exact=str(p), bound=float(bound), passed=p <= bound)
        )
    return PkBoundReport(delta=float(d), bound_claimed=claimed, rows=rows)


def sup_pk(
    instances: Iterable[Tuple[Sequence[int], GapEstimates]],
    delta: Number,
    cfg: AlignConfig,
    ocfg: OracleConfig,
) -> Dict[int, Fraction]:
    """Largest p_k over a finite family of instances"""
    best: Dict[int, Fraction] = {}
    for a, b in instances:
        dist = enumerate_outcomes(a, b, delta, cfg, ocfg)
        for k, p in dist.p_k.items():
            best[k] = max(best.get(k, Fraction(0)), p)
    return best
