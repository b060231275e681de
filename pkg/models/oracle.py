from fractions import Fraction
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.constants import DEFAULT_MAX_ENUMERATION


class OracleConfig(BaseModel):
    """Enumeration limits.

    ``k_window`` is the window K of the p_k definition; ``None`` means K = m,
    which makes the window condition vacuous for k <= K. On the separation
    side the analysis wants L = C_3 log^8 n; here L is whatever the instance has.
    """

    model_config = ConfigDict(frozen=True)

    k_window: Optional[int] = Field(None, ge=1)
    max_m: int = Field(DEFAULT_MAX_ENUMERATION, ge=1)

    def window_for(self, m: int) -> int:
        return self.k_window if self.k_window is not None else m


class BehindDistribution(BaseModel):
    """Exact outcome probabilities of the retention process on one instance.

    ``probs`` is keyed by position labels ("exact", "behind:k", "ahead:k",
    "failed"). ``p_k`` holds the windowed probabilities of ending at least k
    steps behind.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int
    k_window: int
    probs: Dict[str, Fraction]
    p_k: Dict[int, Fraction]

    @model_validator(mode="after")
    def sums_to_one(self) -> "BehindDistribution":
        total = sum(self.probs.values(), Fraction(0))
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"outcome probabilities sum to {float(total)}, not 1")
        return self

    def prob(self, label: str) -> Fraction:
        return self.probs.get(label, Fraction(0))

    def behind_at_least(self, k: int) -> Fraction:
        """P(f_m <= m - k), without the window condition"""
        total = Fraction(0)
        for label, p in self.probs.items():
            if label == "exact" and k <= 0:
                total += p
            elif label.startswith("behind:") and int(label.split(":")[1]) >= k:
                total += p
        return total


class PkBoundRow(BaseModel):
    k: int
    p_k: float
    p_k_exact: str
    bound: float
    passed: bool


class PkBoundReport(BaseModel):
    delta: float
    bound_claimed: bool
    rows: List[PkBoundRow]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)
