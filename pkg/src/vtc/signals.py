"""
Stimulus generation for measurements.

Coherent sines use integer phase accumulation (M*i mod n) so every record
holds exactly M periods without floating-point drift.
"""

import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core import ConfigurationError, SampledInput


class SignalKind(str, Enum):
    """Supported stimulus shapes."""
    SINE = "sine"
    RAMP = "ramp"
    DC = "dc"


class SignalSpec(BaseModel):
    """Stimulus description, normalized to the differential full scale."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: SignalKind = Field(default=SignalKind.SINE)
    amplitude: float = Field(default=1.0, ge=0, description="Peak differential amplitude")
    signal_bin: int = Field(default=127, ge=1, description="Coherent tone bin M")
    phase: float = Field(default=0.0, description="Initial phase in radians")
    dc_level: float = Field(default=0.0, description="Differential level for DC")


def tone_frequency(signal_bin: int, f_s: float, n: int) -> float:
    """Input frequency of a coherent tone in Hz."""
    return signal_bin * f_s / n


def signal_diffs(spec: SignalSpec, f_s: float, n: int) -> np.ndarray:
    """
    Generate the differential input record.

    Args:
        spec: Stimulus description
        f_s: Sampling rate in Hz
        n: Number of samples

    Returns:
        Array of n differential values in [-1, 1]

    Raises:
        ConfigurationError: If the amplitude exceeds full scale or the tone
            is not coherent with the record
    """
    if n < 1:
        raise ConfigurationError(f"record length must be positive, got {n}", field="n_samples")
    if not f_s > 0:
        raise ConfigurationError(f"f_s must be positive, got {f_s}", field="f_s")

    if spec.kind is SignalKind.DC:
        if abs(spec.dc_level) > 1.0:
            raise ConfigurationError(
                f"DC level {spec.dc_level} exceeds full scale", field="stimulus.dc_level"
            )
        return np.full(n, float(spec.dc_level))

    if spec.amplitude > 1.0:
        raise ConfigurationError(
            f"amplitude {spec.amplitude} exceeds full scale", field="stimulus.amplitude"
        )

    if spec.kind is SignalKind.RAMP:
        return np.linspace(-spec.amplitude, spec.amplitude, n)

    m = spec.signal_bin
    if not 0 < m < n / 2:
        raise ConfigurationError(
            f"signal_bin {m} must lie in (0, {n // 2})", field="stimulus.signal_bin"
        )
    if math.gcd(m, n) != 1:
        raise ConfigurationError(
            f"signal_bin {m} is not coprime with record length {n}",
            field="stimulus.signal_bin",
        )
    cycle = (m * np.arange(n, dtype=np.int64)) % n
    return spec.amplitude * np.sin(2.0 * np.pi * cycle / n + spec.phase)


def sample_signal(spec: SignalSpec, f_s: float, n: int) -> list[SampledInput]:
    """Generate the stimulus as held differential samples."""
    return [SampledInput.differential(d) for d in signal_diffs(spec, f_s, n)]
