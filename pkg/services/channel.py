import logging
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Set

import numpy as np

from models.channel import ChannelParams, Trace, TraceGapProfile
from models.strings import BitString, SeparatedString
from services.core import to_bits
from utils.errors import ParameterError
from utils.rng import derive_rng

logger = logging.getLogger(__name__)

_ONE = ord("1")


@lru_cache(maxsize=32)
def _bit_array(x: SeparatedString) -> np.ndarray:
    arr = np.frombuffer(to_bits(x).bits.encode("ascii"), dtype=np.uint8)
    arr.flags.writeable = False
    return arr


def sample_trace(
    x: SeparatedString,
    params: ChannelParams,
    rng: np.random.Generator,
    with_provenance: bool = True,
) -> Trace:
    """Keep every bit of x independently with probability 1 - delta"""
    arr = _bit_array(x)
    keep = rng.random(arr.size) >= params.delta
    bits = BitString(bits=arr[keep].tobytes().decode("ascii"))
    provenance = tuple((np.flatnonzero(keep) + 1).tolist()) if with_provenance else None
    return Trace(bits=bits, provenance=provenance)


def pad_trace(
    trace: Trace,
    L: int,
    delta: float,
    rng: np.random.Generator,
    n: Optional[int] = None,
) -> Trace:
    """Turn a trace of x into a trace of 0^L x 0^L.

    Each padding zero survives with probability 1 - delta, so each side gets
    Bin(L, 1 - delta) zeros. Provenance (if any) is rewritten to index the
    padded string of length n + 2L, which needs n.
    """
    front = rng.random(L) >= delta
    back = rng.random(L) >= delta
    bits = "0" * int(front.sum()) + trace.bits.bits + "0" * int(back.sum())

    provenance = None
    if trace.provenance is not None:
        if n is None:
            raise ParameterError("padding a trace with provenance needs the original length n")
        provenance = tuple(
            (np.flatnonzero(front) + 1).tolist()
            + [i + L for i in trace.provenance]
            + (np.flatnonzero(back) + 1 + L + n).tolist()
        )
    return Trace(bits=BitString(bits=bits), provenance=provenance)


def sample_padded_trace(
    x: SeparatedString,
    L: int,
    params: ChannelParams,
    rng: np.random.Generator,
    with_provenance: bool = True,
) -> Trace:
    trace = sample_trace(x, params, rng, with_provenance=with_provenance)
    return pad_trace(trace, L, params.delta, rng, n=x.n)


def padded(x: SeparatedString, L: int) -> SeparatedString:
    """The string 0^L x 0^L"""
    gaps = list(x.gaps)
    gaps[0] += L
    gaps[-1] += L
    return SeparatedString(gaps=tuple(gaps), L=x.L)


def gap_profile(tr: Trace) -> TraceGapProfile:
    """Positions of the ones (with sentinels 0 and |x~|+1) and the zero runs between them"""
    arr = np.frombuffer(tr.bits.bits.encode("ascii"), dtype=np.uint8)
    ones = np.flatnonzero(arr == _ONE) + 1
    positions = np.concatenate(([0], ones, [arr.size + 1]))
    gaps = np.diff(positions) - 1
    return TraceGapProfile(
        m_tilde=int(ones.size),
        positions=tuple(positions.tolist()),
        gaps=tuple(gaps.tolist()),
    )


def reverse_profile(profile: TraceGapProfile) -> TraceGapProfile:
    """Profile of rev(x~)"""
    end = profile.positions[-1]
    return TraceGapProfile(
        m_tilde=profile.m_tilde,
        positions=tuple(end - r for r in reversed(profile.positions)),
        gaps=profile.gaps[::-1],
    )


class TraceSource:
    """Supplies fresh traces on demand"""

    def stage(self, name: str, budget: int) -> int:
        """Announce a pipeline stage; returns how many traces it may draw"""
        return budget

    def draw(self) -> Trace:
        raise NotImplementedError

    def draw_many(self, count: int) -> Iterator[Trace]:
        for _ in range(count):
            yield self.draw()


class ChannelTraceSource(TraceSource):
    """Simulated traces of a hidden x; trace i uses its own derived stream"""

    def __init__(
        self,
        x: SeparatedString,
        params: ChannelParams,
        padding: int = 0,
        with_provenance: bool = False,
        purpose: str = "trace",
    ):
        self.x = x
        self.params = params
        self.padding = padding
        self.with_provenance = with_provenance
        self.purpose = purpose
        self.drawn = 0

    def draw(self) -> Trace:
        rng = derive_rng(self.params.seed, self.purpose, self.drawn)
        self.drawn += 1
        if self.padding:
            return sample_padded_trace(self.x, self.padding, self.params, rng, self.with_provenance)
        return sample_trace(self.x, self.params, rng, self.with_provenance)


class FileTraceSource(TraceSource):
    """Replays traces read from a file.

    Unpadded traces are padded on the fly when ``padding`` is set. Stages
    draw from windows of the file: t estimation reads the whole file, coarse
    estimation a leading slice and fine estimation the traces after it. A
    budget larger than its window wraps around with a warning and sets
    ``reused`` when coarse and fine traces are no longer disjoint.
    """

    def __init__(self, traces: Sequence[BitString], delta: float, seed: int, padding: int = 0):
        if not traces:
            raise ParameterError("trace file contains no traces")
        self.traces: List[BitString] = list(traces)
        self.delta = delta
        self.seed = seed
        self.padding = padding
        self.drawn = 0
        self.reused = False
        self.used: Dict[str, Set[int]] = {}
        self._stage = "any"
        self._window = (0, len(self.traces))
        self._in_window = 0
        self._coarse_stop = 0
        self._cycled: Set[str] = set()

    def stage(self, name: str, budget: int) -> int:
        size = len(self.traces)
        if name == "coarse":
            stop = min(budget, size)
            self._open(name, 0, stop)
            self._coarse_stop = stop
            if budget > size:
                self._reuse(f"coarse estimation needs {budget} traces, the file has {size}")
            return budget

        if name == "fine":
            start = self._coarse_stop
            left = size - start
            if left == 0:
                self._open(name, 0, size)
                self._reuse(f"no traces left for fine estimation after the {start} used by coarse estimation")
                return budget
            if left < budget:
                logger.info(f"Fine estimation uses the {left} traces left after coarse estimation")
                budget = left
            self._open(name, start, start + budget)
            return budget

        self._open(name, 0, size)
        return budget

    def _open(self, name: str, start: int, stop: int):
        self._stage = name
        self._window = (start, stop)
        self._in_window = 0
        self.used.setdefault(name, set())

    def _reuse(self, detail: str):
        logger.warning(f"{detail}; reusing traces, so coarse and fine samples overlap")
        self.reused = True
        self._cycled.add(self._stage)

    def draw(self) -> Trace:
        start, stop = self._window
        if self._in_window >= stop - start and self._stage not in self._cycled:
            logger.warning(f"Trace budget exceeds the {stop - start} traces available; reusing traces")
            self._cycled.add(self._stage)
            if self._stage in ("coarse", "fine"):
                self.reused = True

        index = start + self._in_window % (stop - start)
        self._in_window += 1
        self.used.setdefault(self._stage, set()).add(index)

        trace = Trace(bits=self.traces[index])
        if self.padding:
            trace = pad_trace(trace, self.padding, self.delta, derive_rng(self.seed, "pad", self.drawn))
        self.drawn += 1
        return trace
