"""Measurement mathematics: spectra, code density, transition counts, sweeps."""

from .linearity import LinearityReport, Stimulus, code_density_linearity
from .power import ToggleMode, ToggleReport, count_transitions, toggle_compare, toggle_report
from .spectral import (
    SpectralMetrics,
    SpectralWindow,
    bank_signal_bin,
    bank_spectral_metrics,
    enob_from_sndr,
    power_spectrum,
    spectral_metrics,
)
from .sweep import (
    DEVIATION_COLUMNS,
    FREQUENCY_COLUMNS,
    DeviationSweep,
    FrequencySweep,
    SweepPoint,
    dt_deviation_sweep,
    frequency_sweep,
)

__all__ = [
    "LinearityReport",
    "Stimulus",
    "code_density_linearity",
    "ToggleMode",
    "ToggleReport",
    "count_transitions",
    "toggle_compare",
    "toggle_report",
    "SpectralMetrics",
    "SpectralWindow",
    "bank_signal_bin",
    "bank_spectral_metrics",
    "enob_from_sndr",
    "power_spectrum",
    "spectral_metrics",
    "DEVIATION_COLUMNS",
    "FREQUENCY_COLUMNS",
    "DeviationSweep",
    "FrequencySweep",
    "SweepPoint",
    "dt_deviation_sweep",
    "frequency_sweep",
]
