"""
Calibration settings and report models.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.core import Polarity


class SearchStrategy(str, Enum):
    """How a stage's tuning space is explored."""
    EXHAUSTIVE = "exhaustive"
    GREEDY = "greedy"


class CalibSpec(BaseModel):
    """Foreground calibration settings."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    dnl_tolerance: float = Field(default=0.05, gt=0, description="Target max|DNL| in LSB")
    ramp_points: int = Field(default=65_536, ge=1, description="Ramp samples per bank histogram")
    max_iterations_per_stage: int = Field(default=80, ge=1)
    search_strategy: SearchStrategy = Field(default=SearchStrategy.EXHAUSTIVE)
    passes: int = Field(
        default=2, ge=1, description="Repeats of the rising/falling sequence to absorb coupling"
    )


@dataclass(frozen=True)
class StageCalibration:
    """Outcome of calibrating one stage on one bank."""

    stage: int
    polarity: Polarity
    iterations: int
    code_rise: int
    code_fall: int
    conv_code: int
    max_dnl: float
    converged: bool
    pass_index: int = 0
    codes_changed: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage,
            "polarity": self.polarity.value,
            "pass": self.pass_index,
            "iterations": self.iterations,
            "code_rise": self.code_rise,
            "code_fall": self.code_fall,
            "conv_code": self.conv_code,
            "max_dnl": self.max_dnl,
            "converged": self.converged,
            "codes_changed": self.codes_changed,
        }


@dataclass
class CalibReport:
    """Aggregate result of a foreground calibration run."""

    per_stage: list[StageCalibration] = field(default_factory=list)
    total_histograms: int = 0
    pre_max_dnl: dict[str, float] = field(default_factory=dict)
    post_max_dnl: dict[str, float] = field(default_factory=dict)
    reverted_banks: list[str] = field(default_factory=list)

    @property
    def reverted(self) -> bool:
        """True when any bank was restored to its pre-calibration codes."""
        return bool(self.reverted_banks)

    @property
    def final_pass(self) -> list[StageCalibration]:
        """Entries of the last pass, one per (bank, stage)."""
        if not self.per_stage:
            return []
        last = max(entry.pass_index for entry in self.per_stage)
        return [entry for entry in self.per_stage if entry.pass_index == last]

    @property
    def converged(self) -> bool:
        return all(entry.converged for entry in self.final_pass)

    def failed_stages(self, polarity: Optional[Polarity] = None) -> list[int]:
        """Stage indices that did not reach the tolerance in the last pass."""
        return sorted(
            entry.stage
            for entry in self.final_pass
            if not entry.converged and (polarity is None or entry.polarity is polarity)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "per_stage": [entry.to_dict() for entry in self.per_stage],
            "total_histograms": self.total_histograms,
            "converged": self.converged,
            "pre_max_dnl": dict(self.pre_max_dnl),
            "post_max_dnl": dict(self.post_max_dnl),
            "reverted": self.reverted,
            "reverted_banks": list(self.reverted_banks),
        }
