import logging
import math
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.alignment import AlignConfig, GapEstimates
from models.channel import ChannelParams
from models.estimation import PipelineConfig
from models.experiment import CheckResult, ValidationOptions, ValidationReport
from models.oracle import OracleConfig
from services.alignment import classify, ever_ahead, perturb_within, simulate_process
from services.channel import ChannelTraceSource, gap_profile, padded, sample_trace
from services.core import chain_instance, check_separated, from_bits, periodic_instance, random_separated, to_bits
from services.estimation import estimate_t, iter_fine_samples
from services.oracle import catalan, check_pk_bound, check_window_zero, d_k, enumerate_outcomes
from services.storage import read_string
from utils.constants import ACCEPTANCE_FLOOR
from utils.errors import ParameterError
from utils.rng import derive_rng

logger = logging.getLogger(__name__)

CHAIN_CFG = AlignConfig(c0=1.0, n_ref=1000)


def _chain(count: int = 10) -> Tuple[List[int], GapEstimates]:
    a = list(chain_instance(10_000, 100, count).gaps)
    return a, GapEstimates(values=tuple(float(v) for v in a))


def _random_instances(count: int, m: int, low: int, high: int, seed: int) -> List[Tuple[List[int], GapEstimates]]:
    rng = derive_rng(seed, "instances")
    instances = []
    for _ in range(count):
        a = rng.integers(low, high + 1, size=m).tolist()
        instances.append((a, GapEstimates(values=tuple(float(v) for v in a))))
    return instances


def _pattern_counts(m: int, delta: float, runs: int, rng: np.random.Generator) -> List[Tuple[Tuple[int, ...], int]]:
    """Sample retention patterns w_0..w_m in bulk and group identical ones"""
    if m == 1:
        return [((1, 1), runs)]
    kept = rng.random((runs, m - 1)) >= delta
    rows, counts = np.unique(kept, axis=0, return_counts=True)
    return [((1, *row.astype(int).tolist(), 1), int(c)) for row, c in zip(rows, counts)]


def _labels(a: Sequence[int], b: GapEstimates, delta: float, runs: int, rng: np.random.Generator) -> Counter:
    tally: Counter = Counter()
    m = len(a)
    for w, count in _pattern_counts(m, delta, runs, rng):
        run = simulate_process(a, b, delta, CHAIN_CFG, rng, w=w)
        tally[classify(run, m).label] += count
    return tally


def check_catalan(**_) -> CheckResult:
    first = [catalan(k) for k in range(5)]
    recurrence = all(
        catalan(k + 1) == sum(catalan(i) * catalan(k - i) for i in range(k + 1)) for k in range(20)
    )
    # 2 <= C_{k+1} / C_k <= 4
    ratio = all(2 * catalan(k) <= catalan(k + 1) <= 4 * catalan(k) for k in range(1, 31))
    d_values = [d_k(0), d_k(1), d_k(2)]
    passed = first == [1, 1, 2, 5, 14] and recurrence and ratio and d_values == [1, 100, 2_000_000]
    return CheckResult(
        name="catalan",
        passed=passed,
        measured={"first": first, "recurrence": recurrence, "ratio_bounds": ratio, "d_k": d_values},
    )


def check_pk_bounds(delta: Optional[float] = None, seed: int = 0, **_) -> CheckResult:
    """p_k <= D_k delta^k on chain, periodic and random instances, plus the window rule"""
    delta = 1e-7 if delta is None else delta
    instances = [_chain()]
    periodic = list(periodic_instance([100, 300], 4, 5_000).gaps)
    instances.append((periodic, GapEstimates(values=tuple(float(v) for v in periodic))))
    instances.extend(_random_instances(3, 10, 100, 1_000, seed))

    failures = []
    worst_ratio = 0.0
    for index, (a, b) in enumerate(instances):
        report = check_pk_bound(a, b, delta, CHAIN_CFG, OracleConfig())
        for row in report.rows:
            if not row.passed:
                failures.append(f"instance {index} k={row.k}: p_k={row.p_k:.3e} > {row.bound:.3e}")
            if row.k >= 1 and row.bound > 0:
                worst_ratio = max(worst_ratio, row.p_k / row.bound)

    a, b = _chain()
    window_ok = check_window_zero(enumerate_outcomes(a, b, 0.2, CHAIN_CFG, OracleConfig(k_window=2)))
    if not window_ok:
        failures.append("p_k is non-zero beyond the window K=2")

    return CheckResult(
        name="pk-bound",
        passed=not failures,
        measured={"delta": delta, "instances": len(instances), "max_ratio_to_bound": worst_ratio, "window_zero": window_ok},
        detail="; ".join(failures),
    )


def check_never_ahead(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    m: int = 200,
    L: int = 500,
    **_,
) -> CheckResult:
    """No retained i ever has f_i > i when a is within (c0/4) sqrt(b log n) of b"""
    runs = 10_000 if runs is None else runs
    delta = 0.01 if delta is None else delta
    cfg = AlignConfig(c0=1.0, n_ref=10**5)
    instances = max(1, runs // 1_000)
    per_instance = max(1, runs // instances)

    ahead = 0
    total = 0
    for index in range(instances):
        rng = derive_rng(seed, "never-ahead", index)
        b_values = rng.integers(L, 2 * L + 1, size=m).tolist()
        a = perturb_within(b_values, cfg, rng)
        b = GapEstimates(values=tuple(float(v) for v in b_values))
        for w, count in _pattern_counts(m, delta, per_instance, rng):
            if ever_ahead(simulate_process(a, b, delta, cfg, rng, w=w)):
                ahead += count
            total += count

    return CheckResult(
        name="never-ahead",
        passed=ahead == 0,
        measured={"runs": total, "ahead_events": ahead, "delta": delta, "m": m},
    )


def check_behind_bound(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    **_,
) -> CheckResult:
    """P(f_m < m) <= 200 delta on chain and random instances; chain rate grows linearly in delta"""
    runs = 100_000 if runs is None else runs
    deltas = [delta] if delta is not None else [0.001, 0.005, 0.01]
    instances = [_chain()] + _random_instances(10, 11, 400, 1_200, seed)

    rates: Dict[str, Dict[str, float]] = {}
    failures = []
    for d in deltas:
        bound = min(1.0, 200 * d)
        for index, (a, b) in enumerate(instances):
            rng = derive_rng(seed, "behind-bound", repr(d), index)
            tally = _labels(a, b, d, runs, rng)
            behind = sum(c for label, c in tally.items() if label.startswith("behind:")) / runs
            rates.setdefault(repr(d), {})[str(index)] = behind
            if behind > bound:
                failures.append(f"delta={d} instance {index}: {behind:.4f} > {bound:.4f}")

    ratio = None
    if len(deltas) > 1:
        low, high = rates[repr(min(deltas))]["0"], rates[repr(max(deltas))]["0"]
        ratio = high / low if low > 0 else math.inf
        if not 5.0 <= ratio <= 20.0:
            failures.append(f"chain rate ratio {ratio:.2f} outside [5, 20]")

    return CheckResult(
        name="behind-bound",
        passed=not failures,
        measured={"runs": runs, "rates": rates, "chain_ratio": ratio},
        detail="; ".join(failures),
    )


def check_oracle_agreement(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    **_,
) -> CheckResult:
    """Monte Carlo outcome frequencies within 4 sigma of the exact enumeration"""
    runs = 1_000_000 if runs is None else runs
    delta = 0.2 if delta is None else delta
    periodic = list(periodic_instance([100, 300], 5, 2_000).gaps)
    instances = [_chain(11), (periodic, GapEstimates(values=tuple(float(v) for v in periodic)))]
    instances.extend(_random_instances(2, 9, 100, 400, seed))

    failures = []
    worst = 0.0
    for index, (a, b) in enumerate(instances):
        exact = enumerate_outcomes(a, b, delta, CHAIN_CFG, OracleConfig())
        tally = _labels(a, b, delta, runs, derive_rng(seed, "oracle-agreement", index))
        for label in set(exact.probs) | set(tally):
            p = float(exact.prob(label))
            observed = tally.get(label, 0) / runs
            tolerance = 4 * math.sqrt(p * (1 - p) / runs) + 1 / runs
            if p == 0 and observed > 0:
                failures.append(f"instance {index} {label}: observed {observed} but exact probability is 0")
                continue
            excess = abs(observed - p) / tolerance
            worst = max(worst, excess)
            if excess > 1.0:
                failures.append(f"instance {index} {label}: observed {observed:.5f}, exact {p:.5f}")

    return CheckResult(
        name="oracle-agreement",
        passed=not failures,
        measured={"runs": runs, "delta": delta, "instances": len(instances), "worst_fraction_of_tolerance": worst},
        detail="; ".join(failures),
    )


def check_ones_count(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    n: int = 2_000,
    **_,
) -> CheckResult:
    """Trace ones and lengths average to t(1-delta) and n(1-delta)"""
    runs = 100_000 if runs is None else runs
    delta = 0.05 if delta is None else delta
    x = random_separated(n, 50, 20, derive_rng(seed, "ones-count", "instance"))
    params = ChannelParams(delta=delta, seed=seed)

    ones, lengths = 0, 0
    for i in range(runs):
        trace = sample_trace(x, params, derive_rng(seed, "ones-count", i), with_provenance=False)
        ones += trace.bits.ones()
        lengths += len(trace)

    mean_ones, mean_length = ones / runs, lengths / runs
    ones_sigma = math.sqrt(x.t * delta * (1 - delta) / runs)
    length_sigma = math.sqrt(x.n * delta * (1 - delta) / runs)
    ones_ok = abs(mean_ones - x.t * (1 - delta)) <= 3 * ones_sigma + 1e-12
    length_ok = abs(mean_length - x.n * (1 - delta)) <= 3 * length_sigma + 1e-12
    return CheckResult(
        name="ones-count",
        passed=ones_ok and length_ok,
        measured={
            "samples": runs,
            "mean_ones": mean_ones,
            "expected_ones": x.t * (1 - delta),
            "mean_length": mean_length,
            "expected_length": x.n * (1 - delta),
        },
    )


def check_t_estimate(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    n: int = 20_000,
    t: int = 100,
    traces: int = 10_000,
    **_,
) -> CheckResult:
    """estimate_t is exact in at least 99% of independent runs"""
    runs = 100 if runs is None else runs
    delta = 0.05 if delta is None else delta
    L = max(0, n // (2 * t) - 1) if t else 0

    exact = 0
    for i in range(runs):
        x = random_separated(n, L, t, derive_rng(seed, "t-estimate", i))
        source = ChannelTraceSource(x, ChannelParams(delta=delta, seed=seed + i), purpose="t-estimate")
        if estimate_t(source.draw_many(traces), delta) == t:
            exact += 1

    return CheckResult(
        name="t-estimate",
        passed=exact >= 0.99 * runs,
        measured={"runs": runs, "exact": exact, "traces_per_run": traces, "t": t},
    )


def _fine_setup(delta: float, seed: int, n: int, L: int, t: int):
    x = random_separated(n, L, t, derive_rng(seed, "fine", "instance"))
    a = padded(x, L)
    b = GapEstimates(values=tuple((1 - delta) * v for v in a.gaps))
    cfg = PipelineConfig(align_cfg=AlignConfig(n_ref=a.n), delta=delta, padding=L)
    return x, a, b, cfg


def check_fine_distribution(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    n: int = 3_000,
    L: int = 300,
    t: int = 6,
    **_,
) -> CheckResult:
    """Accepted gaps for one run follow Bin(a_m, 1 - delta)"""
    samples = 10_000 if runs is None else runs
    delta = 0.05 if delta is None else delta
    x, a, b, cfg = _fine_setup(delta, seed, n, L, t)
    m = a.t // 2
    source = ChannelTraceSource(x, ChannelParams(delta=delta, seed=seed), padding=L, purpose="fine-distribution")

    gaps: List[int] = []
    budget = 20 * samples
    while len(gaps) < samples and source.drawn < budget:
        for sample in iter_fine_samples([source.draw()], a.t, b, cfg):
            if sample.m == m:
                gaps.append(sample.gap)

    if len(gaps) < 2:
        return CheckResult(name="fine-distribution", passed=False, detail=f"only {len(gaps)} accepted samples for m={m}")

    a_m = a.gaps[m]
    mean = float(np.mean(gaps))
    var = float(np.var(gaps, ddof=1))
    expected_mean = (1 - delta) * a_m
    expected_var = a_m * delta * (1 - delta)
    mean_ok = abs(mean - expected_mean) <= 3 * math.sqrt(expected_var / len(gaps)) + 1e-9
    if expected_var == 0:
        var_ok = var == 0
    else:
        var_ok = abs(var / expected_var - 1.0) <= 0.2
    return CheckResult(
        name="fine-distribution",
        passed=len(gaps) >= samples and mean_ok and var_ok,
        measured={
            "m": m,
            "samples": len(gaps),
            "traces": source.drawn,
            "mean": mean,
            "expected_mean": expected_mean,
            "variance": var,
            "expected_variance": expected_var,
        },
    )


def check_fine_soundness(
    runs: Optional[int] = None,
    delta: Optional[float] = None,
    seed: int = 0,
    n: int = 3_000,
    L: int = 300,
    t: int = 6,
    **_,
) -> CheckResult:
    """Every accepted pair points at the true m-th and (m+1)-th ones of x.

    Each run must also be accepted in at least ACCEPTANCE_FLOOR * (1-delta)^2
    of the traces.
    """
    pairs_wanted = 100_000 if runs is None else runs
    delta = 0.05 if delta is None else delta
    x, a, b, cfg = _fine_setup(delta, seed, n, L, t)
    source = ChannelTraceSource(
        x, ChannelParams(delta=delta, seed=seed), padding=L, with_provenance=True, purpose="fine-soundness"
    )

    bits = to_bits(a).bits
    one_index = {pos + 1: k + 1 for k, pos in enumerate(i for i, c in enumerate(bits) if c == "1")}

    accepted = 0
    wrong = 0
    per_m = [0] * (a.t + 1)
    budget = 20 * pairs_wanted
    while accepted < pairs_wanted and source.drawn < budget:
        trace = source.draw()
        profile = gap_profile(trace)

        def x_one(q: int) -> int:
            if q == 0:
                return 0
            if q == profile.m_tilde + 1:
                return a.t + 1
            return one_index.get(trace.provenance[profile.positions[q] - 1], -1)

        for sample in iter_fine_samples([trace], a.t, b, cfg):
            accepted += 1
            per_m[sample.m] += 1
            if x_one(sample.q_f) != sample.m or x_one(sample.q_f + 1) != sample.m + 1:
                wrong += 1

    traces = max(source.drawn, 1)
    rates = [c / traces for c in per_m]
    floor = ACCEPTANCE_FLOOR * (1 - delta) ** 2
    return CheckResult(
        name="fine-soundness",
        passed=wrong == 0 and accepted > 0 and min(rates) >= floor,
        measured={
            "accepted": accepted,
            "misidentified": wrong,
            "traces": source.drawn,
            "acceptance_rates": rates,
            "acceptance_floor": floor,
            "both_retained_rate": (1 - delta) ** 2,
        },
    )


def check_string(string_path: Optional[str] = None, L: Optional[int] = None, **_) -> CheckResult:
    """A string file parses and is L-separated"""
    if string_path is None:
        raise ParameterError("the string check needs --string")
    s = from_bits(read_string(string_path))
    required = s.L if L is None else L
    short = check_separated(s, required) if required is not None else []
    return CheckResult(
        name="string",
        passed=not short,
        measured={"n": s.n, "t": s.t, "min_interior_gap": s.L, "required_L": required, "short_runs": short},
        detail=f"interior runs shorter than L={required}: {short}" if short else "",
    )


SUITES: Dict[str, Callable[..., CheckResult]] = {
    "catalan": check_catalan,
    "never-ahead": check_never_ahead,
    "behind-bound": check_behind_bound,
    "oracle-agreement": check_oracle_agreement,
    "pk-bound": check_pk_bounds,
    "ones-count": check_ones_count,
    "t-estimate": check_t_estimate,
    "fine-distribution": check_fine_distribution,
    "fine-soundness": check_fine_soundness,
    "string": check_string,
}

# Suites run by ``validate all``; the string check needs a file.
DEFAULT_SUITES = [name for name in SUITES if name != "string"]


def run_suite(name: str, options: ValidationOptions) -> CheckResult:
    if name not in SUITES:
        raise ParameterError(f"unknown validation suite '{name}'; choose from {', '.join(SUITES)}")
    kwargs = {key: value for key, value in options.model_dump().items() if value is not None}
    logger.info(f"Running validation suite {name}")
    result = SUITES[name](**kwargs)
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, f"Suite {name}: {'passed' if result.passed else 'FAILED'} {result.detail}".rstrip())
    return result


def run_suites(names: Sequence[str], options: ValidationOptions) -> ValidationReport:
    return ValidationReport(checks=[run_suite(name, options) for name in names])
