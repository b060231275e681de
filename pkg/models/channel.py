import logging
from functools import lru_cache
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.strings import BitString
from utils.constants import WORST_CASE_DELTA

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def _warn_outside_worst_case(delta: float):
    logger.warning(
        f"delta={delta} exceeds the worst-case bound {WORST_CASE_DELTA:.3e}; "
        f"guarantees are only empirical at this noise level"
    )


class ChannelParams(BaseModel):
    """Deletion channel: every bit is dropped independently with probability delta"""

    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., ge=0.0, lt=1.0)
    seed: int = Field(0, ge=0, lt=2**64)

    @field_validator("delta")
    @classmethod
    def warn_large_delta(cls, value: float) -> float:
        if value > WORST_CASE_DELTA:
            _warn_outside_worst_case(value)
        return value

    @property
    def retention(self) -> float:
        return 1.0 - self.delta


class Trace(BaseModel):
    """A sampled noisy copy of x.

    ``provenance`` lists the 1-based positions of x that survived, in order.
    It exists for tests only; reconstruction never reads it.
    """

    model_config = ConfigDict(frozen=True)

    bits: BitString
    provenance: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def provenance_matches_bits(self) -> "Trace":
        if self.provenance is not None:
            if len(self.provenance) != len(self.bits):
                raise ValueError("provenance must list one source index per trace bit")
            if any(b <= a for a, b in zip(self.provenance, self.provenance[1:])):
                raise ValueError("provenance must be strictly increasing")
        return self

    def __len__(self) -> int:
        return len(self.bits)


class TraceGapProfile(BaseModel):
    """Positions r_0..r_{m~+1} of the ones in a trace (with sentinels) and gaps s_q"""

    model_config = ConfigDict(frozen=True)

    m_tilde: int = Field(..., ge=0)
    positions: Tuple[int, ...]
    gaps: Tuple[int, ...]

    @model_validator(mode="after")
    def consistent(self) -> "TraceGapProfile":
        if len(self.positions) != self.m_tilde + 2 or len(self.gaps) != self.m_tilde + 1:
            raise ValueError("profile must carry m_tilde + 2 positions and m_tilde + 1 gaps")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("positions must be strictly increasing")
        return self

    @property
    def length(self) -> int:
        return self.positions[-1] - 1
