"""
Single-tone spectral figures of merit from a coherent FFT.

The power spectrum is one-sided and scaled so that its bins sum to the
mean square of the DC-removed, windowed record. Signal power is the tone
bin (plus one guard bin each side with a Hann window); everything else
except DC is noise and distortion.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Union

import numpy as np

from src.core import ConfigurationError, StatisticsError

logger = logging.getLogger(__name__)

LEAKAGE_LIMIT_DBC = -40.0


class SpectralWindow(str, Enum):
    """Window applied before the FFT."""
    NONE = "none"
    HANN = "hann"


WindowArg = Union[SpectralWindow, str, None]


def _as_window(window: WindowArg) -> SpectralWindow:
    if window is None:
        return SpectralWindow.NONE
    return SpectralWindow(window)


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _db(ratio: float) -> float:
    return 10.0 * math.log10(ratio)


def _json_float(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


@dataclass
class SpectralMetrics:
    """SNDR, SFDR and ENOB of one single-tone record."""

    sndr_db: float
    sfdr_db: float
    enob: float
    signal_bin: int
    n_fft: int
    spur_bin: int
    window: SpectralWindow = SpectralWindow.NONE
    valid: bool = True
    signal_power: float = 0.0
    noise_distortion_power: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def invalid(
        cls, signal_bin: int, n_fft: int, window: SpectralWindow, reason: str
    ) -> "SpectralMetrics":
        return cls(
            sndr_db=math.nan,
            sfdr_db=math.nan,
            enob=math.nan,
            signal_bin=signal_bin,
            n_fft=n_fft,
            spur_bin=-1,
            window=window,
            valid=False,
            warnings=[reason],
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "sndr_db": _json_float(self.sndr_db),
            "sfdr_db": _json_float(self.sfdr_db),
            "enob": _json_float(self.enob),
            "signal_bin": self.signal_bin,
            "n_fft": self.n_fft,
            "spur_bin": self.spur_bin,
            "window": self.window.value,
            "valid": self.valid,
            "signal_power": self.signal_power,
            "noise_distortion_power": self.noise_distortion_power,
            "warnings": list(self.warnings),
        }


def enob_from_sndr(sndr_db: float) -> float:
    return (sndr_db - 1.76) / 6.02


def window_samples(window: WindowArg, n: int) -> np.ndarray:
    """Periodic window of length n."""
    if _as_window(window) is SpectralWindow.HANN:
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    return np.ones(n)


def power_spectrum(codes, n_fft: int, window: WindowArg = None) -> np.ndarray:
    """
    One-sided, Parseval-normalized power spectrum of the first n_fft codes.

    Args:
        codes: Output record (integer codes or real values)
        n_fft: Transform length, a power of two
        window: None or "hann"

    Returns:
        n_fft/2 + 1 bin powers summing to the mean square of the
        DC-removed, windowed record

    Raises:
        ConfigurationError: If n_fft is not a power of two
        StatisticsError: If the record is shorter than n_fft
    """
    if not _is_power_of_two(n_fft):
        raise ConfigurationError(f"n_fft must be a power of two, got {n_fft}", field="n_fft")
    record = np.asarray(codes, dtype=float)
    if record.size < n_fft:
        raise StatisticsError(f"record has {record.size} samples, n_fft needs {n_fft}")
    x = record[:n_fft]
    x = (x - x.mean()) * window_samples(window, n_fft)
    spectrum = np.abs(np.fft.rfft(x)) ** 2 / (n_fft * n_fft)
    spectrum[1:-1] *= 2.0
    return spectrum


def spectral_metrics(
    codes,
    signal_bin: int,
    n_fft: int,
    window: WindowArg = None,
) -> SpectralMetrics:
    """
    Compute SNDR, SFDR and ENOB of a single-tone record.

    Args:
        codes: Output record, at least n_fft long
        signal_bin: Tone bin M (coherent with n_fft when window is None)
        n_fft: Transform length, a power of two
        window: None or "hann"

    Returns:
        SpectralMetrics; an all-constant record is returned with
        valid=False and NaN figures
    """
    window = _as_window(window)
    if not 0 < signal_bin < n_fft // 2:
        raise ConfigurationError(
            f"signal_bin {signal_bin} must lie in (0, {n_fft // 2})", field="signal_bin"
        )
    spectrum = power_spectrum(codes, n_fft, window)
    total = float(spectrum.sum())
    if total <= 0.0:
        return SpectralMetrics.invalid(signal_bin, n_fft, window, "record is constant")

    guard = 1 if window is SpectralWindow.HANN else 0
    dc_bins = np.arange(0, 1 + guard)
    signal_bins = np.arange(signal_bin - guard, signal_bin + guard + 1)

    signal_power = float(spectrum[signal_bins].sum())
    if signal_power <= 0.0:
        return SpectralMetrics.invalid(signal_bin, n_fft, window, "no power at the signal bin")
    noise_power = total - signal_power - float(spectrum[dc_bins].sum())
    noise_power = max(noise_power, np.finfo(float).tiny)

    rest = spectrum.copy()
    rest[dc_bins] = 0.0
    rest[signal_bins] = 0.0
    spur_bin = int(np.argmax(rest))
    spur_power = max(float(rest[spur_bin]), np.finfo(float).tiny)

    sndr = _db(signal_power / noise_power)
    warnings = []
    if window is SpectralWindow.NONE:
        adjacent = max(spectrum[signal_bin - 1], spectrum[signal_bin + 1])
        if adjacent > 0 and _db(adjacent / signal_power) > LEAKAGE_LIMIT_DBC:
            warnings.append(
                f"spectral leakage: bin adjacent to {signal_bin} is above "
                f"{LEAKAGE_LIMIT_DBC:.0f} dBc; the tone may not be coherent"
            )
            logger.warning(warnings[-1])

    return SpectralMetrics(
        sndr_db=sndr,
        sfdr_db=_db(signal_power / spur_power),
        enob=enob_from_sndr(sndr),
        signal_bin=signal_bin,
        n_fft=n_fft,
        spur_bin=spur_bin,
        window=window,
        signal_power=signal_power,
        noise_distortion_power=noise_power,
        warnings=warnings,
    )


def bank_signal_bin(signal_bin: int, n_fft: int) -> int:
    """Tone bin seen by one polarity sub-stream (every other sample)."""
    half = n_fft // 2
    folded = signal_bin % half
    return half - folded if folded > half // 2 else folded


def bank_spectral_metrics(
    codes,
    signal_bin: int,
    n_fft: int,
    window: WindowArg = None,
) -> dict[str, SpectralMetrics]:
    """
    Spectral metrics of the rising and falling sub-streams separately.

    Each bank holds every other sample, so it is analyzed with an
    n_fft/2-point transform at the folded tone bin.
    """
    record = np.asarray(codes)
    if record.size < n_fft:
        raise StatisticsError(f"record has {record.size} samples, n_fft needs {n_fft}")
    half = n_fft // 2
    bin_ = bank_signal_bin(signal_bin, n_fft)
    return {
        "rising": spectral_metrics(record[0:n_fft:2][:half], bin_, half, window),
        "falling": spectral_metrics(record[1:n_fft:2][:half], bin_, half, window),
    }
