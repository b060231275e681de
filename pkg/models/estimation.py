from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from models.alignment import AlignConfig, GapEstimates
from models.strings import BitString
from utils.constants import (
    DEFAULT_COARSE_REPS,
    DEFAULT_FINE_TRACES,
    DEFAULT_MIN_SUCCESS_FRACTION,
    DEFAULT_T_TRACES,
)


class PipelineConfig(BaseModel):
    """Trace budgets and thresholds for one reconstruction.

    ``padding`` is the number of zeros the traces were padded with at each
    end; it is removed from the recovered boundary runs.
    """

    model_config = ConfigDict(frozen=True)

    align_cfg: AlignConfig
    delta: float = Field(..., ge=0.0, lt=1.0)
    coarse_reps: int = Field(DEFAULT_COARSE_REPS, ge=1)
    fine_traces: int = Field(DEFAULT_FINE_TRACES, ge=1)
    t_traces: int = Field(DEFAULT_T_TRACES, ge=1)
    min_success_fraction: float = Field(DEFAULT_MIN_SUCCESS_FRACTION, gt=0.0, le=1.0)
    padding: int = Field(0, ge=0)


class CoarseResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    estimates: GapEstimates
    success_rates: Tuple[float, ...]


class FineSample(BaseModel):
    """An accepted forward/backward pair for run m of one trace"""

    model_config = ConfigDict(frozen=True)

    trace_index: int
    m: int
    q_f: int
    q_b: int
    gap: int


class FineResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    gaps: Tuple[int, ...]
    accepted: Tuple[int, ...]
    traces: int

    @property
    def acceptance_rates(self) -> Tuple[float, ...]:
        return tuple(count / self.traces for count in self.accepted)


class PipelineResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    bits: BitString
    t: int
    coarse: CoarseResult
    fine: FineResult
    padded_gaps: Tuple[int, ...]
    timings: Dict[str, float] = {}
    n_expected: Optional[int] = None
