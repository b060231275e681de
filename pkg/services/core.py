import logging
from itertools import accumulate
from typing import List, Optional, Sequence

import numpy as np

from models.strings import BitString, SeparatedString
from utils.errors import IndexOutOfRange, InfeasibleParameters

logger = logging.getLogger(__name__)


def from_bits(bits: BitString) -> SeparatedString:
    """Parse the maximal runs of zeros around the ones of a bitstring"""
    gaps = tuple(len(run) for run in bits.bits.split("1"))
    interior = gaps[1:-1]
    return SeparatedString(gaps=gaps, L=min(interior) if interior else None)


def to_bits(s: SeparatedString) -> BitString:
    return BitString(bits="1".join("0" * a for a in s.gaps))


def reverse(b: BitString) -> BitString:
    return BitString(bits=b.bits[::-1])


def reverse_string(s: SeparatedString) -> SeparatedString:
    return SeparatedString(gaps=s.gaps[::-1], L=s.L)


class PrefixSums:
    """Prefix-sum table answering half-open range sums in O(1)"""

    def __init__(self, seq: Sequence[float]):
        self._table = [0, *accumulate(seq)]

    def __len__(self) -> int:
        return len(self._table) - 1

    def sum(self, j: int, j2: int):
        if not 0 <= j <= j2 <= len(self):
            raise IndexOutOfRange(f"range [{j}, {j2}) outside a sequence of length {len(self)}")
        return self._table[j2] - self._table[j]


def gap_sum(seq: Sequence[float], j: int, j2: int):
    """a_{j:j2} = a_j + ... + a_{j2-1}"""
    return PrefixSums(seq).sum(j, j2)


def check_separated(s: SeparatedString, L: int) -> List[int]:
    """Indices of interior runs shorter than L"""
    return [i for i in range(1, s.t) if s.gaps[i] < L]


def random_separated(n: int, L: int, target_t: int, rng: np.random.Generator) -> SeparatedString:
    """Uniformly spread L-separated string of length n with target_t ones"""
    if n < 0 or L < 0 or target_t < 0:
        raise InfeasibleParameters("n, L and t must be non-negative")
    if target_t * (L + 1) > n:
        raise InfeasibleParameters(
            f"t*(L+1) <= n is required: {target_t}*({L}+1) = {target_t * (L + 1)} > {n}"
        )
    if target_t == 0:
        return SeparatedString(gaps=(n,), L=L)

    # Spread the slack over the t+1 runs as a uniform composition (stars and bars)
    slack = n - target_t - (target_t - 1) * L
    bars = np.sort(rng.choice(slack + target_t, size=target_t, replace=False))
    edges = np.concatenate(([-1], bars, [slack + target_t]))
    parts = np.diff(edges) - 1

    gaps = [int(p) for p in parts]
    for i in range(1, target_t):
        gaps[i] += L

    s = SeparatedString(gaps=tuple(gaps), L=L)
    logger.debug(f"Generated separated string n={s.n} t={s.t} L={L}")
    return s


def chain_instance(head: int, unit: int, count: int, L: Optional[int] = None) -> SeparatedString:
    """One long leading run followed by `count` equal runs.

    Losing the first few ones makes Align match the first retained one to
    the first one of x, and it stays that many steps behind to the end.
    """
    return SeparatedString(gaps=(head,) + (unit,) * count, L=L)


def periodic_instance(pattern: Sequence[int], repeats: int, head: int, L: Optional[int] = None) -> SeparatedString:
    """Leading run `head` followed by `pattern` repeated `repeats` times"""
    if not pattern or repeats < 1:
        raise InfeasibleParameters("a periodic instance needs a non-empty pattern and repeats >= 1")
    return SeparatedString(gaps=(head,) + tuple(pattern) * repeats, L=L)
