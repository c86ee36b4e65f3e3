"""
Ideal quantizer oracle and timing-budget arithmetic.

``ideal_quantize`` is the ground truth every non-ideal model is checked
against: a mid-rise map of [-t_fs/2, +t_fs/2) onto 2^n codes, with exact
code boundaries resolving to the upper code (the same tie-break as the
time comparator).
"""

import math

import numpy as np

from .errors import ConfigurationError
from .types import FS_PER_SECOND, TimeFs, TimingBudget

MAX_BITS = 16


def _check_quantizer(t_fs: TimeFs, n_bits: int) -> None:
    if not isinstance(n_bits, (int, np.integer)) or not 1 <= n_bits <= MAX_BITS:
        raise ConfigurationError(
            f"n_bits must be an integer in [1, {MAX_BITS}], got {n_bits!r}", field="n_bits"
        )
    if not (t_fs > 0 and math.isfinite(t_fs)):
        raise ConfigurationError(f"t_fs must be positive, got {t_fs}", field="t_fs")


def t_lsb(t_fs: TimeFs, n_bits: int) -> TimeFs:
    """
    Time step of one output code.

    Args:
        t_fs: Full-scale peak-to-peak interval in fs
        n_bits: Converter resolution

    Returns:
        t_fs / 2^n_bits
    """
    _check_quantizer(t_fs, n_bits)
    return t_fs / (1 << int(n_bits))


def ideal_quantize(dt: TimeFs, t_fs: TimeFs, n_bits: int) -> int:
    """
    Quantize a time difference with the ideal mid-rise transfer.

    Args:
        dt: Time difference in fs
        t_fs: Full-scale peak-to-peak interval in fs
        n_bits: Converter resolution in [1, 16]

    Returns:
        clamp(floor((dt + t_fs/2) / t_lsb), 0, 2^n_bits - 1)
    """
    lsb = t_lsb(t_fs, n_bits)
    top = (1 << int(n_bits)) - 1
    code = math.floor((dt + 0.5 * t_fs) / lsb)
    return min(max(code, 0), top)


def ideal_quantize_array(dt, t_fs: TimeFs, n_bits: int) -> np.ndarray:
    """Vectorized ``ideal_quantize``."""
    lsb = t_lsb(t_fs, n_bits)
    top = (1 << int(n_bits)) - 1
    codes = np.floor((np.asarray(dt, dtype=float) + 0.5 * t_fs) / lsb)
    return np.clip(codes, 0, top).astype(np.int64)


def effective_pulse_width(budget: TimingBudget, reset_free: bool) -> TimeFs:
    """Minimum pulse width once the reset phase is removed (reset-free mode)."""
    return budget.t_m - budget.t_reset if reset_free else budget.t_m


def timing_feasible(budget: TimingBudget, reset_free: bool = False) -> bool:
    """
    Check the quantization-period constraint t_s >= t_fs/2 + t_m.

    Args:
        budget: Timing budget of the converter
        reset_free: Evaluate dual-edge operation, where the reset share of
            the minimum pulse width disappears

    Returns:
        True when the sample period accommodates a full-scale conversion
    """
    return budget.t_s >= 0.5 * budget.t_fs + effective_pulse_width(budget, reset_free)


def max_sampling_rate(
    t_fs: TimeFs, t_m: TimeFs, t_reset: TimeFs = 0.0, reset_free: bool = False
) -> float:
    """
    Highest sampling rate (Hz) satisfying the quantization-period constraint.

    Args:
        t_fs: Full-scale peak-to-peak interval in fs
        t_m: Minimum pulse width in fs
        t_reset: Reset share of t_m in fs
        reset_free: Drop the reset share (dual-edge operation)

    Returns:
        1 / (t_fs/2 + effective t_m), in samples per second
    """
    budget = TimingBudget(t_s=0.0, t_fs=t_fs, t_m=t_m, t_reset=t_reset)
    period = 0.5 * budget.t_fs + effective_pulse_width(budget, reset_free)
    if period <= 0:
        raise ConfigurationError("quantization period must be positive", field="t_fs")
    return FS_PER_SECOND / period
