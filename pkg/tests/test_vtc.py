"""
Tests for the dual-edge VTC model and stimulus generation.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core import ConfigurationError, Polarity, RangeExceededError, RngStream, SampledInput
from src.vtc import (
    SignalKind,
    SignalSpec,
    VtcConfig,
    convert,
    convert_array,
    convert_sides,
    normalized_transfer,
    sample_signal,
    signal_diffs,
    tone_frequency,
    transfer_curve,
)

unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


class TestConvert:
    """Test single-sample conversion."""

    @pytest.mark.parametrize("polarity", list(Polarity))
    def test_full_scale_maps_to_slope(self, polarity):
        cfg = VtcConfig.nominal()
        pair = convert(SampledInput.differential(1.0), polarity, cfg)
        assert pair.dt == pytest.approx(cfg.slope(polarity))
        pair = convert(SampledInput.differential(-1.0), polarity, cfg)
        assert pair.dt == pytest.approx(-cfg.slope(polarity))

    @pytest.mark.parametrize("polarity", list(Polarity))
    def test_zero_input_gives_zero_dt(self, polarity):
        pair = convert(SampledInput.differential(0.0), polarity, VtcConfig.nominal(), sample_index=3)
        assert pair.dt == pytest.approx(0.0, abs=1e-9)
        assert pair.sample_index == 3 and pair.polarity is polarity

    def test_linear_config_is_linear(self):
        cfg = VtcConfig.linear()
        for diff in (-0.75, -0.1, 0.3, 0.9):
            pair = convert(SampledInput.differential(diff), Polarity.RISING, cfg)
            assert pair.dt == pytest.approx(diff * 50_000.0)

    def test_dead_time_shifts_both_edges(self):
        base = convert(SampledInput.differential(0.4), Polarity.RISING, VtcConfig.nominal())
        late = convert(
            SampledInput.differential(0.4), Polarity.RISING, VtcConfig(dead_time=1_000.0)
        )
        assert late.t_p == pytest.approx(base.t_p + 1_000.0)
        assert late.dt == pytest.approx(base.dt)

    def test_out_of_range_carries_clipped_pair(self):
        cfg = VtcConfig.nominal()
        with pytest.raises(RangeExceededError) as exc:
            convert(SampledInput.differential(1.2), Polarity.RISING, cfg)
        assert exc.value.clipped.dt == pytest.approx(cfg.slope_up)

    def test_noise_is_reproducible(self):
        cfg = VtcConfig(noise_sigma=100.0)
        sample = SampledInput.differential(0.2)
        a = convert(sample, Polarity.RISING, cfg, RngStream(5))
        b = convert(sample, Polarity.RISING, cfg, RngStream(5))
        clean = convert(sample, Polarity.RISING, cfg)
        assert a == b
        assert a.dt != clean.dt


class TestConvertArray:
    """Test the vectorized conversion."""

    def test_matches_scalar(self):
        cfg = VtcConfig.nominal()
        diffs = np.linspace(-1, 1, 33)
        t_p, t_n = convert_array(diffs, Polarity.FALLING, cfg)
        expected = [convert(SampledInput.differential(d), Polarity.FALLING, cfg).dt for d in diffs]
        np.testing.assert_allclose(t_p - t_n, expected, atol=1e-9)

    def test_range_error_carries_clipped_arrays(self):
        with pytest.raises(RangeExceededError) as exc:
            convert_array([0.5, 1.5], Polarity.RISING, VtcConfig.linear())
        t_p, t_n = exc.value.clipped
        np.testing.assert_allclose(t_p - t_n, [25_000.0, 50_000.0])

    def test_common_mode_rejected_by_differential_output(self):
        cfg = VtcConfig.linear()
        t_p, t_n = convert_sides([0.3], [-0.2], Polarity.RISING, cfg)
        assert float(t_p[0] - t_n[0]) == pytest.approx(0.5 * 50_000.0)

    @given(unit)
    def test_odd_symmetry(self, diff):
        """dt(-x) = -dt(x) on both ramps."""
        cfg = VtcConfig.nominal()
        for polarity in Polarity:
            t_p, t_n = convert_array([diff, -diff], polarity, cfg)
            dt = t_p - t_n
            assert dt[0] == pytest.approx(-dt[1], abs=1e-6)

    @given(unit, unit)
    def test_monotone(self, a, b):
        cfg = VtcConfig.nominal()
        lo, hi = sorted((a, b))
        t_p, t_n = convert_array([lo, hi], Polarity.RISING, cfg)
        dt = t_p - t_n
        assert dt[1] >= dt[0] - 1e-9


class TestTransferCurve:
    """Test the NL metric of the compensated and raw transfer."""

    def test_uncompensated_nl(self):
        curve = transfer_curve(VtcConfig.nominal(), compensated=False)
        assert curve.nl == pytest.approx(0.130, abs=0.02)

    def test_compensated_nl(self):
        raw = transfer_curve(VtcConfig.nominal(), compensated=False)
        comp = transfer_curve(VtcConfig.nominal(), compensated=True)
        assert comp.nl <= 0.020
        assert raw.nl / comp.nl >= 5.0

    def test_linear_config_has_zero_nl(self):
        curve = transfer_curve(VtcConfig.linear())
        assert curve.nl == pytest.approx(0.0, abs=1e-12)
        assert curve.linear_range == pytest.approx(50_000.0)

    @given(st.floats(min_value=1e-3, max_value=1.5 * VtcConfig().expand_alpha))
    def test_compensation_never_hurts(self, alpha):
        cfg = VtcConfig(expand_alpha=alpha)
        raw = transfer_curve(cfg, compensated=False)
        comp = transfer_curve(cfg, compensated=True)
        assert comp.nl <= raw.nl + 1e-12

    def test_compensation_widens_linear_range(self):
        raw = transfer_curve(VtcConfig.nominal(), compensated=False)
        comp = transfer_curve(VtcConfig.nominal(), compensated=True)
        assert comp.linear_range >= raw.linear_range

    def test_arrays_share_length(self):
        curve = transfer_curve(VtcConfig.nominal(), n_points=17)
        assert curve.inputs.size == curve.dt_out.size == curve.deviation.size == 17
        assert curve.to_dict()["n_points"] == 17

    def test_small_grid_rejected(self):
        with pytest.raises(ConfigurationError):
            transfer_curve(VtcConfig.nominal(), n_points=4)

    def test_normalized_transfer_endpoints(self):
        cfg = VtcConfig.nominal()
        assert normalized_transfer(1.0, cfg) == pytest.approx(1.0)
        assert normalized_transfer(-1.0, cfg) == pytest.approx(-1.0)
        assert normalized_transfer(0.0, cfg) == pytest.approx(0.0)

    def test_back_gate_bias_moves_transfer(self):
        cfg = VtcConfig.nominal()
        assert normalized_transfer(0.5, cfg, bias=0.2) != pytest.approx(normalized_transfer(0.5, cfg))


class TestSignals:
    """Test stimulus generation."""

    def test_coherent_sine_is_exact(self):
        diffs = signal_diffs(SignalSpec(signal_bin=127), 12.5e9, 4096)
        spectrum = np.abs(np.fft.rfft(diffs))
        assert int(np.argmax(spectrum)) == 127
        assert np.max(np.abs(diffs)) <= 1.0

    def test_ramp_spans_amplitude(self):
        diffs = signal_diffs(SignalSpec(kind=SignalKind.RAMP, amplitude=0.5), 1e9, 101)
        assert diffs[0] == -0.5 and diffs[-1] == 0.5

    def test_dc_level(self):
        diffs = signal_diffs(SignalSpec(kind=SignalKind.DC, dc_level=0.25), 1e9, 8)
        assert np.all(diffs == 0.25)

    @pytest.mark.parametrize(
        "spec",
        [
            SignalSpec(signal_bin=128),
            SignalSpec(signal_bin=2048),
            SignalSpec(amplitude=1.5),
            SignalSpec(kind=SignalKind.DC, dc_level=2.0),
        ],
    )
    def test_invalid_stimulus_rejected(self, spec):
        with pytest.raises(ConfigurationError):
            signal_diffs(spec, 12.5e9, 4096)

    def test_sample_signal_splits_differentially(self):
        samples = sample_signal(SignalSpec(kind=SignalKind.DC, dc_level=0.5), 1e9, 3)
        assert all(s.diff == pytest.approx(0.5) for s in samples)

    def test_tone_frequency(self):
        assert tone_frequency(127, 12.5e9, 4096) == pytest.approx(127 * 12.5e9 / 4096)
