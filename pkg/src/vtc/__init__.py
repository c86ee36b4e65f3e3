"""Dual-edge voltage-to-time converter model and stimulus generation."""

from .converter import (
    VtcConfig,
    VtcCurve,
    convert,
    convert_array,
    convert_sides,
    normalized_transfer,
    transfer_curve,
)
from .signals import SignalKind, SignalSpec, sample_signal, signal_diffs, tone_frequency

__all__ = [
    "VtcConfig",
    "VtcCurve",
    "convert",
    "convert_array",
    "convert_sides",
    "normalized_transfer",
    "transfer_curve",
    "SignalKind",
    "SignalSpec",
    "sample_signal",
    "signal_diffs",
    "tone_frequency",
]
