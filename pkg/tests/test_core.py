"""
Tests for the shared core: quantizer oracle, timing budget, random streams.
"""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from pydantic import ValidationError

from src.core import (
    ConfigurationError,
    EdgePair,
    ExitCode,
    InputError,
    Polarity,
    RangeExceededError,
    RngStream,
    SampledInput,
    StatisticsError,
    TimingBudget,
    ideal_quantize,
    ideal_quantize_array,
    max_sampling_rate,
    t_lsb,
    time_fs,
    timing_feasible,
)

T_FS = 100_000.0


class TestIdealQuantize:
    """Test the mid-rise oracle."""

    def test_midscale(self):
        """Zero input lands on code 128."""
        assert ideal_quantize(0.0, T_FS, 8) == 128

    def test_lower_boundary(self):
        """Negative full scale maps to code 0."""
        assert ideal_quantize(-50_000.0, T_FS, 8) == 0

    def test_upper_code(self):
        """Just below positive full scale maps to 255."""
        assert ideal_quantize(49_900.0, T_FS, 8) == 255

    def test_clamps_outside_range(self):
        assert ideal_quantize(-1e6, T_FS, 8) == 0
        assert ideal_quantize(1e6, T_FS, 8) == 255

    def test_boundary_ties_resolve_upward(self):
        """An exact code boundary belongs to the upper code."""
        lsb = t_lsb(T_FS, 8)
        assert ideal_quantize(lsb, T_FS, 8) == 129
        assert ideal_quantize(lsb - 1e-6, T_FS, 8) == 128

    @pytest.mark.parametrize("n_bits", [0, 17, 2.5])
    def test_invalid_bits_rejected(self, n_bits):
        with pytest.raises(ConfigurationError):
            ideal_quantize(0.0, T_FS, n_bits)

    @pytest.mark.parametrize("t_fs", [0.0, -1.0, math.inf])
    def test_invalid_full_scale_rejected(self, t_fs):
        with pytest.raises(ConfigurationError):
            ideal_quantize(0.0, t_fs, 8)

    def test_array_matches_scalar(self, dt_grid):
        """Vectorized form agrees element-wise on the exhaustive grid."""
        expected = [ideal_quantize(float(dt), T_FS, 8) for dt in dt_grid[::37]]
        assert ideal_quantize_array(dt_grid[::37], T_FS, 8).tolist() == expected

    @given(
        st.floats(min_value=-60_000, max_value=60_000),
        st.floats(min_value=0, max_value=10_000),
    )
    def test_monotone(self, dt, step):
        """Monotone non-decreasing in dt."""
        assert ideal_quantize(dt + step, T_FS, 8) >= ideal_quantize(dt, T_FS, 8)

    @given(st.floats(min_value=-49_000, max_value=49_000), st.integers(min_value=1, max_value=12))
    def test_mid_rise_symmetry(self, dt, n_bits):
        """Codes of dt and -dt-eps sum to the top code off boundaries."""
        lsb = t_lsb(T_FS, n_bits)
        position = (dt + T_FS / 2) / lsb
        assume(abs(position - round(position)) > 1e-6)
        top = (1 << n_bits) - 1
        assert ideal_quantize(dt, T_FS, n_bits) + ideal_quantize(-dt - 1e-9, T_FS, n_bits) == top


class TestTLsb:
    """Test the LSB helper."""

    @pytest.mark.parametrize(
        "t_fs,n_bits,expected",
        [(100_000.0, 8, 390.625), (100_000.0, 1, 50_000.0), (51_200.0, 8, 200.0)],
    )
    def test_values(self, t_fs, n_bits, expected):
        assert t_lsb(t_fs, n_bits) == expected


class TestTimingFeasible:
    """Test the quantization-period constraint."""

    def test_design_target(self):
        """12.5 GS/s with t_m 30 ps is feasible."""
        assert timing_feasible(TimingBudget(t_s=80_000, t_fs=T_FS, t_m=30_000))

    def test_boundary(self):
        assert not timing_feasible(TimingBudget(t_s=79_999, t_fs=T_FS, t_m=30_000))

    def test_reset_free_relaxes_constraint(self):
        budget = TimingBudget(t_s=60_000, t_fs=T_FS, t_m=30_000, t_reset=20_000)
        assert timing_feasible(budget, reset_free=True)
        assert not timing_feasible(budget, reset_free=False)

    def test_reset_beyond_pulse_rejected(self):
        with pytest.raises(ValueError):
            TimingBudget(t_s=1, t_fs=1, t_m=10, t_reset=20)

    @pytest.mark.parametrize("value", [math.nan, math.inf])
    def test_non_finite_time_rejected(self, value):
        with pytest.raises(ValidationError):
            TimingBudget(t_s=value, t_fs=T_FS, t_m=30_000)

    def test_max_sampling_rate(self):
        assert max_sampling_rate(T_FS, 30_000) == pytest.approx(12.5e9)
        assert max_sampling_rate(T_FS, 30_000, 20_000, reset_free=True) == pytest.approx(
            1e15 / 60_000
        )

    def test_max_sampling_rate_degenerate(self):
        with pytest.raises(ConfigurationError):
            max_sampling_rate(0.0, 0.0)


class TestTypes:
    """Test value types and conversions."""

    def test_polarity_ping_pong(self):
        assert [Polarity.for_index(i) for i in range(4)] == [
            Polarity.RISING,
            Polarity.FALLING,
            Polarity.RISING,
            Polarity.FALLING,
        ]
        assert Polarity.RISING.bank == 0 and Polarity.FALLING.bank == 1

    def test_edge_pair_dt(self):
        pair = EdgePair(t_p=1_000.0, t_n=400.0, polarity=Polarity.RISING, sample_index=0)
        assert pair.dt == 600.0

    def test_sampled_input_differential(self):
        sample = SampledInput.differential(0.5)
        assert sample.v_sh_p == 0.25 and sample.v_sh_n == -0.25
        assert sample.diff == 0.5

    def test_sampled_input_rejects_nan(self):
        with pytest.raises(ConfigurationError):
            SampledInput(v_sh_p=float("nan"), v_sh_n=0.0)

    @pytest.mark.parametrize("value", [math.nan, math.inf, 2e9])
    def test_time_fs_rejects(self, value):
        with pytest.raises(ConfigurationError):
            time_fs(value)


class TestRngStream:
    """Test deterministic random streams."""

    def test_reproducible(self):
        a = RngStream(42, 3).standard_normal(16)
        b = RngStream(42, 3).standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(42, 0).standard_normal(16)
        b = RngStream(42, 1).standard_normal(16)
        assert not np.array_equal(a, b)

    def test_substream_independent_of_draw_order(self):
        """A child stream does not depend on draws taken from its parent."""
        parent = RngStream(7)
        parent.standard_normal(100)
        fresh = RngStream(7).substream(5).standard_normal(8)
        np.testing.assert_array_equal(parent.substream(5).standard_normal(8), fresh)

    def test_coin_is_boolean(self):
        flips = RngStream(1).coin(1000)
        assert flips.dtype == bool
        assert 400 < flips.sum() < 600


class TestErrors:
    """Test error records and exit codes."""

    @pytest.mark.parametrize(
        "error,code",
        [
            (ConfigurationError("x"), ExitCode.CONFIGURATION),
            (InputError("x"), ExitCode.INPUT),
            (RangeExceededError("x"), ExitCode.RANGE),
            (StatisticsError("x"), ExitCode.STATISTICS),
        ],
    )
    def test_exit_codes(self, error, code):
        assert error.exit_code is code
        assert error.to_dict()["exit_code"] == int(code)

    def test_configuration_error_record(self):
        error = ConfigurationError("unknown key", field="tdc.jitter_sgma", line=4, suggestion="jitter_sigma")
        record = error.to_dict()
        assert record["field"] == "tdc.jitter_sgma"
        assert record["line"] == 4
        assert "did you mean 'jitter_sigma'" in record["message"]
