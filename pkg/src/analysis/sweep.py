"""
Monte Carlo sweeps of spectral performance.

Trials use common random numbers: trial t draws its stage-deviation
vector and its conversion noise once and reuses them at every grid
point, so differences along the sweep come from the swept parameter and
not from resampling. Trials fan out over worker processes; results are
gathered in trial order so the worker count never changes the output.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.adc import AdcConfig, TimeDomainAdc
from src.core import ConfigurationError, RngStream
from src.tdc import N_STAGES
from src.vtc import SignalSpec, signal_diffs, tone_frequency

from .spectral import spectral_metrics

logger = logging.getLogger(__name__)

MIN_TRIALS = 10

DEVIATION_COLUMNS = ["sigma_dt_lsb", "sndr_db_mean", "sndr_db_std", "sfdr_db_mean", "sfdr_db_std"]
FREQUENCY_COLUMNS = [
    "signal_bin",
    "f_in_hz",
    "sndr_db_mean",
    "sndr_db_std",
    "sfdr_db_mean",
    "sfdr_db_std",
]


@dataclass(frozen=True)
class SweepPoint:
    """Trial statistics at one grid value."""

    value: float
    sndr_db: tuple[float, ...]
    sfdr_db: tuple[float, ...]

    @property
    def sndr_db_mean(self) -> float:
        return float(np.mean(self.sndr_db))

    @property
    def sndr_db_std(self) -> float:
        return float(np.std(self.sndr_db))

    @property
    def sfdr_db_mean(self) -> float:
        return float(np.mean(self.sfdr_db))

    @property
    def sfdr_db_std(self) -> float:
        return float(np.std(self.sfdr_db))

    def stats(self) -> dict[str, float]:
        return {
            "sndr_db_mean": self.sndr_db_mean,
            "sndr_db_std": self.sndr_db_std,
            "sfdr_db_mean": self.sfdr_db_mean,
            "sfdr_db_std": self.sfdr_db_std,
        }


def _n_fft(config: AdcConfig, n_fft: Optional[int]) -> int:
    return n_fft or config.n_samples


def _check_trials(trials: int) -> None:
    if trials < MIN_TRIALS:
        raise ConfigurationError(
            f"trials must be at least {MIN_TRIALS}, got {trials}", field="experiment.trials"
        )


def _fan_out(function, jobs: list[tuple], workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [function(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(function, *zip(*jobs)))


# =============================================================================
# ΔT deviation sweep
# =============================================================================


def _deviation_trial(
    config: AdcConfig,
    grid: tuple[float, ...],
    jitter_sigma: float,
    signal: SignalSpec,
    n_fft: int,
    rng: RngStream,
) -> list[tuple[float, float]]:
    """Run one trial over the whole grid; returns (sndr, sfdr) per point."""
    deviation = rng.substream(0).standard_normal((2, N_STAGES))
    deviation[:, N_STAGES - 1] = 0.0
    diffs = signal_diffs(signal, config.f_s, n_fft)
    base = config.tdc.model_copy(update={"jitter_sigma": jitter_sigma})
    results = []
    for sigma in grid:
        scale = sigma * base.lsb
        tdc = base.with_mismatch(rise=deviation[0] * scale, fall=deviation[1] * scale)
        adc = TimeDomainAdc(config.model_copy(update={"tdc": tdc}))
        codes = adc.convert_codes(diffs, rng.substream(1))
        metrics = spectral_metrics(codes, signal.signal_bin, n_fft)
        results.append((metrics.sndr_db, metrics.sfdr_db))
    return results


@dataclass
class DeviationSweep:
    """SNDR/SFDR versus random per-stage ΔT deviation."""

    points: list[SweepPoint]
    jitter_sigma: float
    trials: int

    def rows(self) -> list[dict]:
        return [{"sigma_dt_lsb": point.value, **point.stats()} for point in self.points]


def dt_deviation_sweep(
    adc_template: AdcConfig,
    sigma_dt_grid: Sequence[float],
    jitter_sigma: float,
    trials: int,
    rng: RngStream,
    signal: Optional[SignalSpec] = None,
    n_fft: Optional[int] = None,
    workers: int = 1,
) -> DeviationSweep:
    """
    Sweep the standard deviation of uncorrectable stage-delay errors.

    Each trial draws per-stage, per-polarity deviations ~ N(0, σ·T_LSB)
    applied on top of the template's mismatch (outside the tuning codes).

    Args:
        adc_template: Converter configuration to perturb
        sigma_dt_grid: Ascending deviations in LSB
        jitter_sigma: TDC jitter per delay element in fs
        trials: Trials per grid point (>= 10)
        rng: Parent stream; trial t uses rng.substream(t)
        signal: Coherent sine stimulus (defaults to full scale, bin 127)
        n_fft: FFT length (defaults to the template's n_samples)
        workers: Worker processes for the trial fan-out

    Returns:
        DeviationSweep with one point per grid value
    """
    grid = tuple(float(s) for s in sigma_dt_grid)
    if not grid:
        raise ConfigurationError("sigma_dt_grid is empty", field="sweep.sigma_dt_grid")
    if any(s < 0 for s in grid) or any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError(
            "sigma_dt_grid must be non-negative and ascending", field="sweep.sigma_dt_grid"
        )
    _check_trials(trials)
    signal = signal or SignalSpec()
    n_fft = _n_fft(adc_template, n_fft)

    jobs = [
        (adc_template, grid, jitter_sigma, signal, n_fft, rng.substream(trial))
        for trial in range(trials)
    ]
    per_trial = _fan_out(_deviation_trial, jobs, workers)

    points = []
    for position, sigma in enumerate(grid):
        sndr = tuple(trial[position][0] for trial in per_trial)
        sfdr = tuple(trial[position][1] for trial in per_trial)
        points.append(SweepPoint(value=sigma, sndr_db=sndr, sfdr_db=sfdr))
        logger.info(
            f"sigma_dt {sigma:.3f} LSB: SNDR {points[-1].sndr_db_mean:.2f} dB, "
            f"SFDR {points[-1].sfdr_db_mean:.2f} dB"
        )
    return DeviationSweep(points=points, jitter_sigma=jitter_sigma, trials=trials)


# =============================================================================
# Input-frequency sweep
# =============================================================================


def _frequency_trial(
    config: AdcConfig,
    bins: tuple[int, ...],
    signal: SignalSpec,
    n_fft: int,
    rng: RngStream,
) -> list[tuple[float, float]]:
    adc = TimeDomainAdc(config)
    results = []
    for signal_bin in bins:
        tone = signal.model_copy(update={"signal_bin": signal_bin})
        codes = adc.convert_codes(signal_diffs(tone, config.f_s, n_fft), rng)
        metrics = spectral_metrics(codes, signal_bin, n_fft)
        results.append((metrics.sndr_db, metrics.sfdr_db))
    return results


@dataclass
class FrequencySweep:
    """SNDR/SFDR versus input tone bin."""

    points: list[SweepPoint]
    f_s: float
    n_fft: int

    def rows(self) -> list[dict]:
        return [
            {
                "signal_bin": int(point.value),
                "f_in_hz": tone_frequency(int(point.value), self.f_s, self.n_fft),
                **point.stats(),
            }
            for point in self.points
        ]


def frequency_sweep(
    adc_template: AdcConfig,
    signal_bins: Sequence[int],
    trials: int,
    rng: RngStream,
    signal: Optional[SignalSpec] = None,
    n_fft: Optional[int] = None,
    workers: int = 1,
) -> FrequencySweep:
    """
    Sweep the coherent input tone across the first Nyquist zone.

    Args:
        adc_template: Converter configuration (noise settings apply)
        signal_bins: Tone bins, each coprime with n_fft
        trials: Noise realizations per bin (>= 10)
        rng: Parent stream; trial t uses rng.substream(t)
        signal: Amplitude and phase of the tone
        n_fft: FFT length (defaults to the template's n_samples)
        workers: Worker processes for the trial fan-out

    Returns:
        FrequencySweep with one point per bin
    """
    bins = tuple(int(b) for b in signal_bins)
    if not bins:
        raise ConfigurationError("signal_bins is empty", field="sweep.signal_bins")
    _check_trials(trials)
    signal = signal or SignalSpec()
    n_fft = _n_fft(adc_template, n_fft)

    jobs = [(adc_template, bins, signal, n_fft, rng.substream(trial)) for trial in range(trials)]
    per_trial = _fan_out(_frequency_trial, jobs, workers)

    points = []
    for position, signal_bin in enumerate(bins):
        sndr = tuple(trial[position][0] for trial in per_trial)
        sfdr = tuple(trial[position][1] for trial in per_trial)
        points.append(SweepPoint(value=float(signal_bin), sndr_db=sndr, sfdr_db=sfdr))
        logger.info(f"signal_bin {signal_bin}: SNDR {points[-1].sndr_db_mean:.2f} dB")
    return FrequencySweep(points=points, f_s=adc_template.f_s, n_fft=n_fft)
