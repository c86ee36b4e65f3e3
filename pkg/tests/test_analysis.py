"""
Tests for spectral, linearity, power and sweep measurements.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.adc import AdcConfig
from src.analysis import (
    ToggleMode,
    bank_signal_bin,
    bank_spectral_metrics,
    code_density_linearity,
    count_transitions,
    dt_deviation_sweep,
    enob_from_sndr,
    frequency_sweep,
    power_spectrum,
    spectral_metrics,
    toggle_compare,
    toggle_report,
)
from src.core import ConfigurationError, InputError, RngStream, StatisticsError, ideal_quantize_array
from src.vtc import SignalSpec, signal_diffs

N = 4096


def _sine(signal_bin=127, n=N, amplitude=1.0):
    return signal_diffs(SignalSpec(signal_bin=signal_bin, amplitude=amplitude), 12.5e9, n)


def _quantized_sine(signal_bin=127, n=N):
    return ideal_quantize_array(_sine(signal_bin, n) * 50_000.0, 100_000.0, 8)


class TestSpectral:
    """Test SNDR/SFDR/ENOB extraction."""

    def test_ideal_quantized_sine(self):
        metrics = spectral_metrics(_quantized_sine(), 127, N)
        assert metrics.valid
        assert metrics.sndr_db == pytest.approx(49.9, abs=0.5)
        assert metrics.enob == pytest.approx(8.0, abs=0.1)
        assert metrics.sfdr_db > metrics.sndr_db
        assert metrics.warnings == []

    def test_unquantized_sine(self):
        assert spectral_metrics(_sine(), 127, N).sndr_db > 120.0

    def test_constant_record_is_invalid(self):
        metrics = spectral_metrics(np.full(N, 128), 127, N)
        assert not metrics.valid
        assert math.isnan(metrics.sndr_db)
        assert metrics.to_dict()["sndr_db"] is None

    def test_leakage_warning(self):
        x = np.sin(2 * np.pi * 127.5 * np.arange(N) / N)
        metrics = spectral_metrics(x, 127, N)
        assert any("leakage" in w for w in metrics.warnings)

    def test_hann_window_absorbs_leakage(self):
        x = np.sin(2 * np.pi * 127.3 * np.arange(N) / N)
        plain = spectral_metrics(x, 127, N)
        hann = spectral_metrics(x, 127, N, window="hann")
        assert hann.sndr_db > plain.sndr_db + 10.0
        assert hann.warnings == []

    def test_harmonic_is_the_spur(self):
        x = _sine() + 0.01 * _sine(signal_bin=381)
        metrics = spectral_metrics(x, 127, N)
        assert metrics.spur_bin == 381
        assert metrics.sfdr_db == pytest.approx(40.0, abs=0.1)

    def test_parseval(self):
        x = _quantized_sine().astype(float)
        assert power_spectrum(x, N).sum() == pytest.approx(np.mean((x - x.mean()) ** 2))

    def test_bad_fft_length(self):
        with pytest.raises(ConfigurationError):
            power_spectrum(np.zeros(1000), 1000)

    def test_short_record(self):
        with pytest.raises(StatisticsError):
            power_spectrum(np.zeros(100), 128)

    @pytest.mark.parametrize("signal_bin", [0, N // 2])
    def test_bad_signal_bin(self, signal_bin):
        with pytest.raises(ConfigurationError):
            spectral_metrics(_quantized_sine(), signal_bin, N)

    def test_enob(self):
        assert enob_from_sndr(6.02 * 8 + 1.76) == pytest.approx(8.0)

    @pytest.mark.parametrize("signal_bin,expected", [(127, 127), (2039, 9), (1021, 1021), (1031, 1017)])
    def test_bank_signal_bin(self, signal_bin, expected):
        assert bank_signal_bin(signal_bin, N) == expected

    def test_bank_metrics(self):
        banks = bank_spectral_metrics(_quantized_sine(), 127, N)
        assert set(banks) == {"rising", "falling"}
        for metrics in banks.values():
            assert metrics.n_fft == N // 2
            assert metrics.sndr_db == pytest.approx(49.9, abs=1.0)


class TestLinearity:
    """Test the code-density histogram."""

    def test_uniform_histogram(self):
        codes = np.repeat(np.arange(256), 100)
        report = code_density_linearity(codes, 8)
        assert report.max_abs_dnl == 0.0
        assert report.max_abs_inl == 0.0
        assert report.missing_codes == []
        assert report.hits_per_code == 100.0

    def test_wide_code(self):
        counts = np.full(256, 100)
        counts[100] = 200
        report = code_density_linearity(np.repeat(np.arange(256), counts), 8)
        assert report.dnl[99] == pytest.approx(1.0, abs=0.02)
        assert report.inl[99] - report.inl[98] == pytest.approx(1.0, abs=0.02)

    def test_missing_code(self):
        counts = np.full(256, 100)
        counts[42] = 0
        report = code_density_linearity(np.repeat(np.arange(256), counts), 8)
        assert report.missing_codes == [42]
        assert report.dnl[41] == pytest.approx(-1.0)

    def test_ideal_converter_ramp(self, ideal_adc, rng):
        ramp = np.linspace(-1.0, 1.0, 1 << 16)
        report = code_density_linearity(ideal_adc.convert_codes(ramp, rng), 8)
        assert report.max_abs_dnl <= 0.15

    def test_too_few_samples(self):
        with pytest.raises(StatisticsError):
            code_density_linearity(np.arange(256), 8)

    def test_code_out_of_range(self):
        with pytest.raises(InputError):
            code_density_linearity(np.full(1 << 15, 256), 8)

    def test_rows(self):
        report = code_density_linearity(np.repeat(np.arange(16), 64), 4)
        rows = report.rows()
        assert len(rows) == 14
        assert rows[0] == {"code": 1, "dnl_lsb": 0.0, "inl_lsb": 0.0}
        assert "dnl" not in report.to_dict(include_arrays=False)


class TestPower:
    """Test the transition-count power proxy."""

    def test_reference_chain(self):
        single, dual, reduction = toggle_compare(56, 1_000)
        assert single.transitions == 112_000
        assert dual.transitions == 56_000
        assert reduction == 0.5

    def test_no_samples(self):
        single, dual, _ = toggle_compare(56, 0)
        assert single.transitions == dual.transitions == 0

    def test_single_element(self):
        assert count_transitions(ToggleMode.SINGLE_EDGE, 1, 1) == 2
        assert count_transitions(ToggleMode.DUAL_EDGE, 1, 1) == 1

    def test_overhead_reduces_chain_level_figure(self):
        _, _, reduction = toggle_compare(56, 1_000, overhead_per_element=0.5)
        assert reduction == pytest.approx(0.4)

    @pytest.mark.parametrize("args", [(0, 10), (5, -1)])
    def test_invalid_arguments(self, args):
        with pytest.raises(ConfigurationError):
            toggle_report(ToggleMode.DUAL_EDGE, *args)

    @given(st.integers(min_value=1, max_value=200), st.integers(min_value=0, max_value=500))
    def test_dual_is_half_of_single(self, n, s):
        single, dual, _ = toggle_compare(n, s)
        assert single.transitions == 2 * dual.transitions == 2 * n * s


class TestDeviationSweep:
    """Test the stage-delay deviation Monte Carlo."""

    def test_degradation_shape(self):
        sweep = dt_deviation_sweep(AdcConfig.ideal(), [0.0, 1.0, 4.0], 0.0, 10, RngStream(21))
        first, middle, last = sweep.points
        assert first.sndr_db_mean == pytest.approx(49.9, abs=0.5)
        assert first.sndr_db_mean >= middle.sndr_db_mean - middle.sndr_db_std
        assert middle.sndr_db_mean >= last.sndr_db_mean - last.sndr_db_std
        assert last.sndr_db_mean < 30.0
        for point in sweep.points:
            assert point.sfdr_db_mean >= point.sndr_db_mean
            assert len(point.sndr_db) == 10

    def test_rows(self):
        sweep = dt_deviation_sweep(
            AdcConfig.ideal(), [0.0, 0.5], 0.0, 10, RngStream(1), n_fft=1024
        )
        rows = sweep.rows()
        assert [row["sigma_dt_lsb"] for row in rows] == [0.0, 0.5]
        assert set(rows[0]) == {
            "sigma_dt_lsb",
            "sndr_db_mean",
            "sndr_db_std",
            "sfdr_db_mean",
            "sfdr_db_std",
        }

    def test_worker_count_does_not_change_results(self):
        args = (AdcConfig.ideal(), [0.0, 1.0], 20.0, 10, RngStream(5))
        serial = dt_deviation_sweep(*args, n_fft=1024, workers=1).rows()
        parallel = dt_deviation_sweep(*args, n_fft=1024, workers=2).rows()
        assert serial == parallel

    @pytest.mark.parametrize(
        "grid,trials", [([], 10), ([1.0, 0.5], 10), ([-1.0], 10), ([0.0], 9)]
    )
    def test_invalid_configuration(self, grid, trials):
        with pytest.raises(ConfigurationError):
            dt_deviation_sweep(AdcConfig.ideal(), grid, 0.0, trials, RngStream(0))


class TestFrequencySweep:
    """Test the input-tone sweep."""

    def test_ideal_chain_is_flat(self):
        sweep = frequency_sweep(AdcConfig.ideal(), [7, 127], 10, RngStream(2), n_fft=1024)
        rows = sweep.rows()
        assert [row["signal_bin"] for row in rows] == [7, 127]
        assert rows[1]["f_in_hz"] == pytest.approx(127 * 12.5e9 / 1024)
        for point in sweep.points:
            assert point.sndr_db_std == pytest.approx(0.0, abs=1e-9)

    def test_empty_bins_rejected(self):
        with pytest.raises(ConfigurationError):
            frequency_sweep(AdcConfig.ideal(), [], 10, RngStream(0))

    def test_incoherent_bin_rejected(self):
        with pytest.raises(ConfigurationError):
            frequency_sweep(AdcConfig.ideal(), [128], 10, RngStream(0), n_fft=1024)
