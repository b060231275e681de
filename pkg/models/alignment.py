import logging
from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from utils.constants import DEFAULT_C0

logger = logging.getLogger(__name__)


class LogBase(str, Enum):
    NATURAL = "natural"
    BASE2 = "base2"


class AlignConfig(BaseModel):
    """Match threshold c0 * log(n_ref) * sqrt(b_{j:j'}).

    Larger c0 tolerates noisier estimates but needs longer runs (larger L)
    to keep neighbouring runs from matching each other.
    """

    model_config = ConfigDict(frozen=True)

    c0: float = Field(DEFAULT_C0, gt=0.0)
    n_ref: int = Field(..., ge=2)
    log_base: LogBase = LogBase.NATURAL


class GapEstimates(BaseModel):
    """Estimates b_0..b_{m'-1} of the retained run lengths"""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]
    _prefix: Tuple[float, ...] = PrivateAttr()

    @field_validator("values")
    @classmethod
    def non_negative(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(v < 0 for v in value):
            raise ValueError("gap estimates must be non-negative")
        return value

    def model_post_init(self, __context) -> None:
        running = [0.0]
        for v in self.values:
            running.append(running[-1] + v)
        self._prefix = tuple(running)

    @property
    def prefix(self) -> Tuple[float, ...]:
        return self._prefix

    def __len__(self) -> int:
        return len(self.values)

    def reversed(self) -> "GapEstimates":
        return GapEstimates(values=self.values[::-1])

    def out_of_range(self, low: float, high: float) -> Tuple[int, ...]:
        """Indices outside the [low, high] range the analysis assumes"""
        return tuple(i for i, v in enumerate(self.values) if not low <= v <= high)


class AlignOutcome(BaseModel):
    """Align's answer: the q-th one of the trace and the gap after it, or FAIL"""

    model_config = ConfigDict(frozen=True)

    success: bool
    q: Optional[int] = None
    gap: Optional[int] = None

    @model_validator(mode="after")
    def fields_match_success(self) -> "AlignOutcome":
        if self.success and (self.q is None or self.gap is None or self.q < 0):
            raise ValueError("a successful alignment carries q >= 0 and a gap")
        if not self.success and (self.q is not None or self.gap is not None):
            raise ValueError("a failed alignment carries no position")
        return self

    @classmethod
    def found(cls, q: int, gap: int) -> "AlignOutcome":
        return cls(success=True, q=q, gap=gap)

    @classmethod
    def fail(cls) -> "AlignOutcome":
        return cls(success=False)


class AlignTrajectory(BaseModel):
    """Values of `val` after each Align step.

    ``vals[q]`` is the alignment of the q-th one of the trace (``vals[0] = 0``
    for the virtual one in front). ``failed`` is set when a step found no match.
    """

    model_config = ConfigDict(frozen=True)

    vals: Tuple[int, ...]
    failed: bool = False

    def position_of(self, m: int) -> Optional[int]:
        """q with vals[q] == m, if the trajectory lands exactly on m"""
        for q, val in enumerate(self.vals):
            if val >= m:
                return q if val == m else None
        return None


class ProcessRun(BaseModel):
    """One realisation of the retention process.

    ``w`` holds w_0..w_m. ``f`` maps every retained index to its alignment
    value; ``None`` marks the "no such j'" sentinel.
    """

    model_config = ConfigDict(frozen=True)

    w: Tuple[int, ...]
    f: Dict[int, Optional[int]]

    @model_validator(mode="after")
    def well_formed(self) -> "ProcessRun":
        if len(self.w) < 2 or self.w[0] != 1 or self.w[-1] != 1:
            raise ValueError("w_0 and w_m are always retained")
        if sorted(self.f) != [i for i, bit in enumerate(self.w) if bit]:
            raise ValueError("f is defined exactly on the retained indices")
        if self.f[0] != 0:
            raise ValueError("f_0 must be 0")
        reached = [v for _, v in sorted(self.f.items()) if v is not None]
        if any(b <= a for a, b in zip(reached, reached[1:])):
            raise ValueError("f must increase along retained indices")
        return self

    @property
    def m(self) -> int:
        return len(self.w) - 1

    @property
    def final(self) -> Optional[int]:
        return self.f[self.m]


class PositionKind(str, Enum):
    EXACT = "exact"
    BEHIND = "behind"
    AHEAD = "ahead"
    FAILED = "failed"


class Position(BaseModel):
    """Where the process ended relative to the true index m"""

    model_config = ConfigDict(frozen=True)

    kind: PositionKind
    steps: int = 0

    @property
    def label(self) -> str:
        if self.kind in (PositionKind.EXACT, PositionKind.FAILED):
            return self.kind.value
        return f"{self.kind.value}:{self.steps}"

    @classmethod
    def parse(cls, label: str) -> "Position":
        kind, _, steps = label.partition(":")
        return cls(kind=PositionKind(kind), steps=int(steps) if steps else 0)
