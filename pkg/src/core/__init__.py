"""Shared domain types, errors, random streams and the ideal quantizer."""

from .errors import (
    ArtifactError,
    ConfigurationError,
    ExitCode,
    InputError,
    RangeExceededError,
    SimulatorError,
    StatisticsError,
)
from .quantizer import (
    effective_pulse_width,
    ideal_quantize,
    ideal_quantize_array,
    max_sampling_rate,
    t_lsb,
    timing_feasible,
)
from .rng import RngStream
from .types import (
    FS_PER_SECOND,
    EdgePair,
    Polarity,
    SampledInput,
    TimeFs,
    TimingBudget,
    time_fs,
)

__all__ = [
    "ArtifactError",
    "ConfigurationError",
    "ExitCode",
    "InputError",
    "RangeExceededError",
    "SimulatorError",
    "StatisticsError",
    "effective_pulse_width",
    "ideal_quantize",
    "ideal_quantize_array",
    "max_sampling_rate",
    "t_lsb",
    "timing_feasible",
    "RngStream",
    "FS_PER_SECOND",
    "EdgePair",
    "Polarity",
    "SampledInput",
    "TimeFs",
    "TimingBudget",
    "time_fs",
]
