"""
Domain types shared across the simulator.

All times are real-valued femtoseconds (``TimeFs``). Voltages are
normalized so the differential full scale is [-1, +1].
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Annotated

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator

from .errors import ConfigurationError

FS_PER_SECOND = 1e15

# float64 keeps better than 1e-3 fs resolution up to this magnitude
TIME_FS_LIMIT = 1e9


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"time must be finite, got {value}")
    return value


# Model fields typed TimeFs reject NaN and infinities at validation time
TimeFs = Annotated[float, AfterValidator(_finite)]


def time_fs(value: float, name: str = "time") -> TimeFs:
    """
    Validate a femtosecond quantity.

    Args:
        value: Candidate time value
        name: Field name used in the error message

    Returns:
        The value as a float

    Raises:
        ConfigurationError: If the value is not finite or exceeds the
            representable range
    """
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value}", field=name)
    if abs(value) > TIME_FS_LIMIT:
        raise ConfigurationError(
            f"{name} = {value} fs is outside ±{TIME_FS_LIMIT:g} fs", field=name
        )
    return value


class Polarity(str, Enum):
    """Edge polarity carrying a sample through the converter."""
    RISING = "rising"
    FALLING = "falling"

    @classmethod
    def for_index(cls, sample_index: int) -> "Polarity":
        """Ping-pong assignment: even samples ride the rising edge."""
        return cls.RISING if sample_index % 2 == 0 else cls.FALLING

    @property
    def bank(self) -> int:
        """Index of the synchronization bank capturing this polarity."""
        return 0 if self is Polarity.RISING else 1


class TimingBudget(BaseModel):
    """Timing quantities of the quantization-period constraint."""

    model_config = ConfigDict(frozen=True)

    t_s: TimeFs = Field(..., ge=0, description="Sample period")
    t_fs: TimeFs = Field(..., ge=0, description="Full-scale peak-to-peak interval")
    t_m: TimeFs = Field(..., ge=0, description="Minimum pulse width")
    t_reset: TimeFs = Field(
        default=0.0, ge=0, description="Part of t_m spent on reset (0 when dual-edge)"
    )

    @model_validator(mode="after")
    def _reset_within_pulse(self) -> "TimingBudget":
        if self.t_reset > self.t_m:
            raise ValueError(f"t_reset ({self.t_reset}) exceeds t_m ({self.t_m})")
        return self


@dataclass(frozen=True)
class EdgePair:
    """The P-side and N-side edges of one polarity carrying one sample."""

    t_p: TimeFs
    t_n: TimeFs
    polarity: Polarity
    sample_index: int

    @property
    def dt(self) -> TimeFs:
        """Time difference seen by the first TDC stage."""
        return self.t_p - self.t_n


@dataclass(frozen=True)
class SampledInput:
    """Held differential sample, normalized to the converter full scale."""

    v_sh_p: float
    v_sh_n: float

    def __post_init__(self):
        if not (math.isfinite(self.v_sh_p) and math.isfinite(self.v_sh_n)):
            raise ConfigurationError("sampled voltages must be finite")

    @property
    def diff(self) -> float:
        return self.v_sh_p - self.v_sh_n

    @classmethod
    def differential(cls, diff: float) -> "SampledInput":
        """Split a differential value symmetrically around zero common mode."""
        half = 0.5 * float(diff)
        return cls(v_sh_p=half, v_sh_n=-half)
