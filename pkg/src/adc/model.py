"""
Full converter pipeline: sample-and-hold, dual-edge VTC and dual-edge TDC.

Consecutive samples ride alternating edges (ping-pong): even samples are
converted on the rising ramp and captured by the rising bank, odd samples
on the falling ramp and the falling bank.

Random streams are laid out as ``rng/0/<bank>`` for VTC edge noise and
``rng/1/<bank>`` for TDC jitter and metastability, so the record-level and
bank-level entry points consume identical draws.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core import (
    FS_PER_SECOND,
    EdgePair,
    Polarity,
    RngStream,
    SampledInput,
    TimeFs,
    TimingBudget,
    ideal_quantize_array,
    timing_feasible,
)
from src.tdc import (
    N_STAGES,
    ConversionBatch,
    ConversionStream,
    StageConfig,
    TdcConfig,
    convert_batch,
    convert_stream,
)
from src.vtc import SignalKind, SignalSpec, VtcConfig, convert_array, convert_sides, signal_diffs

logger = logging.getLogger(__name__)

VTC_STREAM = 0
TDC_STREAM = 1


class AdcConfig(BaseModel):
    """Complete converter parameterization."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    vtc: VtcConfig = Field(default_factory=VtcConfig.nominal)
    tdc: TdcConfig = Field(default_factory=TdcConfig.nominal)
    f_s: float = Field(default=12.5e9, gt=0, description="Sampling rate in Hz")
    n_samples: int = Field(default=4096, ge=1)
    t_m: TimeFs = Field(default=30_000.0, ge=0, description="Minimum pulse width")
    t_reset: TimeFs = Field(default=20_000.0, ge=0, description="Reset share of t_m")
    reset_free: bool = Field(default=True, description="Dual-edge operation without reset")

    @model_validator(mode="after")
    def _reset_within_pulse(self) -> "AdcConfig":
        if self.t_reset > self.t_m:
            raise ValueError(f"t_reset ({self.t_reset}) exceeds t_m ({self.t_m})")
        return self

    @classmethod
    def nominal(cls, **overrides) -> "AdcConfig":
        return cls(**overrides)

    @classmethod
    def ideal(cls, t_fs: TimeFs = 100_000.0, **overrides) -> "AdcConfig":
        """Linear VTC feeding an ideal TDC."""
        return cls(vtc=VtcConfig.linear(t_fs), tdc=TdcConfig.ideal(t_fs), **overrides)

    @property
    def t_s(self) -> TimeFs:
        return FS_PER_SECOND / self.f_s

    def timing_budget(self) -> TimingBudget:
        return TimingBudget(t_s=self.t_s, t_fs=self.tdc.t_fs, t_m=self.t_m, t_reset=self.t_reset)

    def feasible(self) -> bool:
        return timing_feasible(self.timing_budget(), reset_free=self.reset_free)


class TimeDomainAdc:
    """
    Mutable converter instance.

    Calibration adjusts the TDC tuning codes in place; everything else is
    read from the frozen ``AdcConfig``.
    """

    def __init__(self, config: Optional[AdcConfig] = None):
        self._config = config or AdcConfig()
        self._ramp_cache: dict[tuple[Polarity, int], np.ndarray] = {}

    @property
    def config(self) -> AdcConfig:
        return self._config

    @config.setter
    def config(self, config: AdcConfig) -> None:
        if config.vtc != self._config.vtc or config.f_s != self._config.f_s:
            self._ramp_cache.clear()
        self._config = config

    @property
    def vtc(self) -> VtcConfig:
        return self._config.vtc

    @property
    def tdc(self) -> TdcConfig:
        return self._config.tdc

    @tdc.setter
    def tdc(self, tdc: TdcConfig) -> None:
        self._config = self._config.model_copy(update={"tdc": tdc})

    def replace_stage(self, stage: StageConfig) -> None:
        """Swap one TDC stage (used by the calibration search)."""
        self.tdc = self.tdc.with_stage(stage)

    # =========================================================================
    # Conversion
    # =========================================================================

    def edge_pairs(self, samples: Sequence[SampledInput], rng: RngStream) -> list[EdgePair]:
        """
        Convert held samples into edge pairs, alternating polarity.

        Args:
            samples: Held samples; sample i rides Polarity.for_index(i)
            rng: VTC noise stream (bank b draws from rng.substream(b))

        Returns:
            Edge pairs in sample order
        """
        v_p = np.array([s.v_sh_p for s in samples], dtype=float)
        v_n = np.array([s.v_sh_n for s in samples], dtype=float)
        pairs: list[Optional[EdgePair]] = [None] * len(samples)
        for polarity in Polarity:
            start = polarity.bank
            t_p, t_n = convert_sides(
                v_p[start::2], v_n[start::2], polarity, self.vtc, rng.substream(polarity.bank)
            )
            for offset, (tp, tn) in enumerate(zip(t_p, t_n)):
                index = start + 2 * offset
                pairs[index] = EdgePair(
                    t_p=float(tp), t_n=float(tn), polarity=polarity, sample_index=index
                )
        return pairs

    def convert(self, samples: Sequence[SampledInput], rng: RngStream) -> ConversionStream:
        """Run a record of held samples through VTC and TDC."""
        pairs = self.edge_pairs(samples, rng.substream(VTC_STREAM))
        return convert_stream(pairs, self.tdc, rng.substream(TDC_STREAM))

    def convert_bank(
        self,
        diffs,
        polarity: Polarity,
        rng: RngStream,
        bit_depth: int = N_STAGES,
    ) -> ConversionBatch:
        """
        Convert differential inputs on one bank only.

        Args:
            diffs: Differential inputs (zero common mode)
            polarity: Bank to use
            rng: Parent stream (same layout as ``convert``)
            bit_depth: Number of leading TDC decisions to resolve

        Returns:
            ConversionBatch of the bank
        """
        t_p, t_n = convert_array(
            diffs, polarity, self.vtc, rng.substream(VTC_STREAM).substream(polarity.bank)
        )
        return convert_batch(
            t_p - t_n,
            polarity,
            self.tdc,
            rng.substream(TDC_STREAM).substream(polarity.bank),
            bit_depth=bit_depth,
        )

    def convert_codes(self, diffs, rng: RngStream) -> np.ndarray:
        """Interleaved output codes of a differential record."""
        diffs = np.asarray(diffs, dtype=float)
        codes = np.zeros(diffs.size, dtype=np.int64)
        for polarity in Polarity:
            start = polarity.bank
            if diffs[start::2].size:
                codes[start::2] = self.convert_bank(diffs[start::2], polarity, rng).codes
        return codes

    # =========================================================================
    # Calibration ramp
    # =========================================================================

    def ramp_dt(self, polarity: Polarity, ramp_points: int, rng: RngStream) -> np.ndarray:
        """
        Time differences produced by a full-scale ramp on one bank.

        The ramp has ``2 * ramp_points`` samples and the bank keeps the
        samples of its own parity. Noiseless results are cached until the
        VTC configuration changes.
        """
        key = (polarity, ramp_points)
        cached = self._ramp_cache.get(key)
        if cached is not None:
            return cached
        diffs = signal_diffs(SignalSpec(kind=SignalKind.RAMP), self._config.f_s, 2 * ramp_points)
        t_p, t_n = convert_array(
            diffs[polarity.bank :: 2],
            polarity,
            self.vtc,
            rng.substream(VTC_STREAM).substream(polarity.bank),
        )
        dt = t_p - t_n
        if self.vtc.noise_sigma == 0:
            self._ramp_cache[key] = dt
            logger.debug(f"Cached {polarity.value} calibration ramp ({ramp_points} points)")
        return dt

    def ramp_codes(
        self, polarity: Polarity, ramp_points: int, rng: RngStream, bit_depth: int = N_STAGES
    ) -> np.ndarray:
        """Bank codes of the calibration ramp at the given bit depth."""
        dt = self.ramp_dt(polarity, ramp_points, rng)
        batch = convert_batch(
            dt,
            polarity,
            self.tdc,
            rng.substream(TDC_STREAM).substream(polarity.bank),
            bit_depth=bit_depth,
        )
        return batch.codes

    def ramp_reference(
        self, polarity: Polarity, ramp_points: int, rng: RngStream, bit_depth: int = N_STAGES
    ) -> np.ndarray:
        """Ideal-quantizer codes of the same calibration ramp samples."""
        dt = self.ramp_dt(polarity, ramp_points, rng)
        return ideal_quantize_array(dt, self.tdc.t_fs, bit_depth)
