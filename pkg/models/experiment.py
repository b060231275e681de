from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from models.alignment import AlignConfig, LogBase
from models.estimation import PipelineConfig
from utils.constants import (
    DEFAULT_C0,
    DEFAULT_COARSE_REPS,
    DEFAULT_FINE_TRACES,
    DEFAULT_MIN_SUCCESS_FRACTION,
    DEFAULT_T_TRACES,
)


class ExperimentConfig(BaseModel):
    n: int = Field(..., ge=1)
    L: int = Field(..., ge=0)
    t: Optional[int] = Field(None, ge=0)
    density: Optional[float] = Field(None, gt=0.0, le=1.0)
    delta: float = Field(0.0, ge=0.0, lt=1.0)
    master_seed: int = Field(0, ge=0, lt=2**64)
    coarse_reps: int = Field(DEFAULT_COARSE_REPS, ge=1)
    fine_traces: int = Field(DEFAULT_FINE_TRACES, ge=1)
    t_traces: int = Field(DEFAULT_T_TRACES, ge=1)
    min_success_fraction: float = Field(DEFAULT_MIN_SUCCESS_FRACTION, gt=0.0, le=1.0)
    c0: float = Field(DEFAULT_C0, gt=0.0)
    log_base: LogBase = LogBase.NATURAL
    n_ref: Optional[int] = Field(None, ge=2)
    repetitions: int = Field(1, ge=1)
    out_dir: Optional[str] = None

    @model_validator(mode="after")
    def ones_specified(self) -> "ExperimentConfig":
        if self.t is None and self.density is None:
            raise ValueError("either t or density must be given")
        return self

    @property
    def target_t(self) -> int:
        if self.t is not None:
            return self.t
        return int(round(self.density * self.n))

    def pipeline_config(self) -> PipelineConfig:
        n_ref = self.n_ref if self.n_ref is not None else max(2, self.n + 2 * self.L)
        return PipelineConfig(
            align_cfg=AlignConfig(c0=self.c0, n_ref=n_ref, log_base=self.log_base),
            delta=self.delta,
            coarse_reps=self.coarse_reps,
            fine_traces=self.fine_traces,
            t_traces=self.t_traces,
            min_success_fraction=self.min_success_fraction,
            padding=self.L,
        )


class RepetitionRecord(BaseModel):
    index: int
    seed: int
    success: bool
    failing_stage: Optional[str] = None
    failing_m: Optional[int] = None
    t_true: int
    t_estimated: Optional[int] = None
    edit_distance: Optional[int] = None
    coarse_errors: List[float] = []
    coarse_within_tolerance: Optional[bool] = None
    coarse_success_rates: List[float] = []
    fine_acceptance_rates: List[float] = []


class Aggregate(BaseModel):
    runs: int
    successes: int
    success_rate: float
    max_coarse_error: Optional[float] = None
    coarse_within_tolerance_rate: Optional[float] = None
    mean_fine_acceptance: Optional[float] = None


class ExperimentReport(BaseModel):
    config: ExperimentConfig
    repetitions: List[RepetitionRecord]
    aggregate: Aggregate
    timings: List[Dict[str, float]] = []

    def science_json(self) -> str:
        """JSON of everything except wall-clock timings"""
        return self.model_dump_json(indent=2, exclude={"timings"})


class CheckResult(BaseModel):
    name: str
    passed: bool
    measured: Dict[str, Any] = {}
    detail: str = ""


class ValidationReport(BaseModel):
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class StringMetadata(BaseModel):
    """Sidecar written next to a generated string"""

    n: int
    L: int
    t: int
    seed: int
    gaps: List[int]


class TraceFileHeader(BaseModel):
    n: int = Field(..., ge=0)
    delta: float = Field(..., ge=0.0, lt=1.0)
    seed: int = Field(..., ge=0)
    count: int = Field(..., ge=0)
    pad: Optional[int] = Field(None, ge=0)


class ValidationOptions(BaseModel):
    """Overrides for validation suites; None keeps each suite's default budget"""

    runs: Optional[int] = Field(None, ge=1)
    delta: Optional[float] = Field(None, ge=0.0, lt=1.0)
    seed: int = Field(0, ge=0)
    string_path: Optional[str] = None
    L: Optional[int] = Field(None, ge=0)


class ReconstructionReport(BaseModel):
    """Outcome of reconstructing from a trace file"""

    trace_file: str
    header: TraceFileHeader
    pipeline: PipelineConfig
    success: bool
    matches_reference: Optional[bool] = None
    failing_stage: Optional[str] = None
    failing_m: Optional[int] = None
    t_estimated: Optional[int] = None
    recovered_n: Optional[int] = None
    edit_distance: Optional[int] = None
    coarse_estimates: List[float] = []
    coarse_success_rates: List[float] = []
    fine_acceptance_rates: List[float] = []
    stage_traces: Dict[str, int] = {}
    traces_reused: bool = False
    timings: Dict[str, float] = {}

    def science_json(self) -> str:
        return self.model_dump_json(indent=2, exclude={"timings"})
