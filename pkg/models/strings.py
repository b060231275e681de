from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

_BIT_CHARS = str.maketrans("", "", "01")


class BitString(BaseModel):
    """A finite bitstring stored as ASCII '0'/'1' text"""

    model_config = ConfigDict(frozen=True)

    bits: str

    @field_validator("bits")
    @classmethod
    def only_bits(cls, value: str) -> str:
        if value.translate(_BIT_CHARS):
            raise ValueError("bitstrings may only contain '0' and '1'")
        return value

    @property
    def length(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return self.bits

    def ones(self) -> int:
        return self.bits.count("1")


class SeparatedString(BaseModel):
    """Run-length view of x: gaps a_0..a_t of zeros around t ones.

    ``L`` is separation metadata. ``None`` stands for an unbounded
    separation, which is what strings with at most one 1 carry.
    """

    model_config = ConfigDict(frozen=True)

    gaps: Tuple[int, ...]
    L: Optional[int] = None

    @field_validator("gaps")
    @classmethod
    def non_negative_gaps(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("a separated string has at least one run")
        if any(a < 0 for a in value):
            raise ValueError("run lengths must be non-negative")
        return value

    @model_validator(mode="after")
    def interior_runs_respect_separation(self) -> "SeparatedString":
        if self.L is not None:
            short = [i for i in range(1, self.t) if self.gaps[i] < self.L]
            if short:
                raise ValueError(f"interior runs {short} are shorter than L={self.L}")
        return self

    @property
    def t(self) -> int:
        return len(self.gaps) - 1

    @property
    def n(self) -> int:
        return sum(self.gaps) + self.t

    def interior_gaps(self) -> Tuple[int, ...]:
        return self.gaps[1:-1] if self.t >= 1 else ()
