"""
Behavioral model of the dual-edge voltage-to-time converter.

Each conversion period has three phases: the differential input is
sampled and held, a rising ramp converts it into a rising edge pair, and
the following falling ramp converts the next sample into a falling edge
pair. The ramp is quasi-triangular with an expanding nonlinearity; a
compressive stage (tuned by two back-gate biases) pre-distorts the
crossing so the overall transfer is close to linear.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core import (
    ConfigurationError,
    EdgePair,
    Polarity,
    RangeExceededError,
    RngStream,
    SampledInput,
    TimeFs,
)

logger = logging.getLogger(__name__)


class VtcConfig(BaseModel):
    """VTC parameters. Defaults reproduce the nominal expanding ramp."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    slope_up: float = Field(
        default=50_000.0, gt=0, description="fs per unit differential input, rising ramp"
    )
    slope_down: float = Field(
        default=50_000.0, gt=0, description="fs per unit differential input, falling ramp"
    )
    expand_alpha: float = Field(
        default=2.0817, ge=0, description="Cubic expansion coefficient of the ramp"
    )
    comp_gain: float = Field(
        default=0.8, ge=0, le=1, description="Share of the crossing taken by the compressor"
    )
    comp_knee: float = Field(
        default=0.77,
        gt=0,
        description="Compression knee, referred to the expansion (divided by sqrt(alpha))",
    )
    comp_bias_1: float = Field(default=0.0, gt=-1, description="P-side back-gate trim")
    comp_bias_2: float = Field(default=0.0, gt=-1, description="N-side back-gate trim")
    dead_time: TimeFs = Field(default=0.0, ge=0, description="Delay before the ramp starts")
    t_fs_target: TimeFs = Field(default=100_000.0, gt=0, description="Target full scale")
    compensate: bool = Field(default=True, description="Enable the compensation stage")
    noise_sigma: TimeFs = Field(default=0.0, ge=0, description="Per-edge Gaussian jitter")
    resolution_bits: int = Field(default=8, ge=1, le=16, description="LSB for linear range")

    @classmethod
    def nominal(cls) -> "VtcConfig":
        return cls()

    @classmethod
    def linear(cls, t_fs_target: TimeFs = 100_000.0) -> "VtcConfig":
        """A perfectly linear ramp spanning ±t_fs_target/2."""
        return cls(
            expand_alpha=0.0,
            slope_up=0.5 * t_fs_target,
            slope_down=0.5 * t_fs_target,
            t_fs_target=t_fs_target,
        )

    def slope(self, polarity: Polarity) -> float:
        return self.slope_up if polarity is Polarity.RISING else self.slope_down


@dataclass
class VtcCurve:
    """Noiseless transfer curve and its linearity figures."""

    inputs: np.ndarray
    dt_out: np.ndarray
    deviation: np.ndarray
    nl: float
    linear_range: TimeFs
    compensated: bool

    def to_dict(self) -> dict:
        return {
            "nl": self.nl,
            "linear_range_fs": self.linear_range,
            "compensated": self.compensated,
            "n_points": int(self.inputs.size),
        }


# =============================================================================
# Transfer model
# =============================================================================


def _expand(x, alpha: float):
    return x * (1.0 + alpha * x * x)


def _compress(y, gain: float, knee: float):
    return (1.0 - gain) * y + gain * knee * np.tanh(y / knee)


def normalized_transfer(x, cfg: VtcConfig, bias: float = 0.0):
    """
    Odd crossing transfer with N(±1) = ±1.

    Args:
        x: Side voltage as a fraction of half the differential full scale
        cfg: VTC configuration
        bias: Back-gate trim of this side's compressor

    Returns:
        Normalized crossing position in [-1, 1] for |x| <= 1
    """
    alpha = cfg.expand_alpha
    y = _expand(x, alpha)
    y_fs = _expand(1.0, alpha)
    if not (cfg.compensate and alpha > 0 and cfg.comp_gain > 0):
        return y / y_fs
    knee = cfg.comp_knee / math.sqrt(alpha) * (1.0 + bias)
    return _compress(y, cfg.comp_gain, knee) / _compress(y_fs, cfg.comp_gain, knee)


def _side_offsets(v_p, v_n, cfg: VtcConfig, slope: float):
    """Crossing time of each side measured from ramp start (after dead time)."""
    half = 0.5 * slope
    offset_p = half * (1.0 + normalized_transfer(2.0 * v_p, cfg, cfg.comp_bias_1))
    offset_n = half * (1.0 + normalized_transfer(2.0 * v_n, cfg, cfg.comp_bias_2))
    return offset_p, offset_n


def _edges(v_p, v_n, polarity: Polarity, cfg: VtcConfig, rng: Optional[RngStream]):
    slope = cfg.slope(polarity)
    offset_p, offset_n = _side_offsets(v_p, v_n, cfg, slope)
    if polarity is Polarity.RISING:
        t_p = cfg.dead_time + offset_p
        t_n = cfg.dead_time + offset_n
    else:
        # the down-ramp meets the higher side first; the falling comparator
        # inputs are cross-wired so the TDC sees the rising sign convention
        raw_p = cfg.dead_time + (slope - offset_p)
        raw_n = cfg.dead_time + (slope - offset_n)
        t_p, t_n = raw_n, raw_p
    if rng is not None and cfg.noise_sigma > 0:
        size = np.shape(t_p) or None
        t_p = t_p + rng.normal(cfg.noise_sigma, size)
        t_n = t_n + rng.normal(cfg.noise_sigma, size)
    return t_p, t_n


# =============================================================================
# Operations
# =============================================================================


def convert(
    sample: SampledInput,
    polarity: Polarity,
    cfg: VtcConfig,
    rng: Optional[RngStream] = None,
    sample_index: int = 0,
) -> EdgePair:
    """
    Convert one held sample into an edge pair.

    Args:
        sample: Held differential sample
        polarity: Ramp direction used for this sample
        cfg: VTC configuration
        rng: Stream for edge noise (ignored when noise_sigma is 0)
        sample_index: Index recorded on the edge pair

    Returns:
        EdgePair whose t_p - t_n follows the compensated transfer of sample.diff

    Raises:
        RangeExceededError: If |diff| exceeds full scale; the error carries
            the pair converted from the clipped input
    """
    diff = sample.diff
    if abs(diff) > 1.0:
        excess = diff - math.copysign(1.0, diff)
        clipped_sample = SampledInput(
            v_sh_p=sample.v_sh_p - 0.5 * excess, v_sh_n=sample.v_sh_n + 0.5 * excess
        )
        clipped = convert(clipped_sample, polarity, cfg, rng, sample_index)
        raise RangeExceededError(
            f"differential input {diff:+.6f} exceeds full scale", clipped=clipped
        )
    t_p, t_n = _edges(sample.v_sh_p, sample.v_sh_n, polarity, cfg, rng)
    return EdgePair(
        t_p=float(t_p), t_n=float(t_n), polarity=polarity, sample_index=sample_index
    )


def convert_sides(
    v_p,
    v_n,
    polarity: Polarity,
    cfg: VtcConfig,
    rng: Optional[RngStream] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Convert arrays of held P/N side voltages at once.

    Noise (when enabled) is drawn for all P edges, then all N edges.

    Returns:
        (t_p, t_n) arrays in fs

    Raises:
        RangeExceededError: If any |v_p - v_n| exceeds full scale; the
            error carries the (t_p, t_n) arrays of the clipped record
    """
    v_p = np.asarray(v_p, dtype=float)
    v_n = np.asarray(v_n, dtype=float)
    diffs = v_p - v_n
    over = np.abs(diffs) > 1.0
    if np.any(over):
        excess = diffs - np.clip(diffs, -1.0, 1.0)
        raise RangeExceededError(
            f"{int(over.sum())} of {diffs.size} inputs exceed full scale",
            clipped=_edges(v_p - 0.5 * excess, v_n + 0.5 * excess, polarity, cfg, rng),
        )
    return _edges(v_p, v_n, polarity, cfg, rng)


def convert_array(
    diffs,
    polarity: Polarity,
    cfg: VtcConfig,
    rng: Optional[RngStream] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Convert a record of differential inputs with zero common mode."""
    half = 0.5 * np.asarray(diffs, dtype=float)
    return convert_sides(half, -half, polarity, cfg, rng)


def transfer_curve(cfg: VtcConfig, n_points: int = 64, compensated: bool = True) -> VtcCurve:
    """
    Evaluate the noiseless transfer over a uniform input grid.

    NL is the largest deviation from the endpoint-anchored line divided by
    the full-scale target; the linear range is the widest symmetric input
    interval whose deviation stays within one LSB, reported as output time.

    Args:
        cfg: VTC configuration
        n_points: Grid size (>= 8)
        compensated: Evaluate with or without the compensation stage

    Returns:
        VtcCurve
    """
    if n_points < 8:
        raise ConfigurationError(f"n_points must be >= 8, got {n_points}", field="sweep.n_points")
    curve_cfg = cfg.model_copy(update={"compensate": compensated, "noise_sigma": 0.0})
    inputs = np.linspace(-1.0, 1.0, n_points)
    t_p, t_n = convert_array(inputs, Polarity.RISING, curve_cfg)
    dt = t_p - t_n

    span = (dt[-1] - dt[0]) / (inputs[-1] - inputs[0])
    fit = dt[0] + (inputs - inputs[0]) * span
    deviation = np.abs(dt - fit)
    nl = float(deviation.max() / cfg.t_fs_target)

    lsb = cfg.t_fs_target / (1 << cfg.resolution_bits)
    magnitude = np.abs(inputs)
    failing = magnitude[deviation > lsb]
    if failing.size == 0:
        reach = float(magnitude.max())
    else:
        inside = magnitude[magnitude < failing.min()]
        reach = float(inside.max()) if inside.size else 0.0
    linear_range = reach * cfg.slope_up

    logger.debug(f"VTC curve: compensated={compensated} nl={nl:.4f} range={linear_range:.0f} fs")
    return VtcCurve(
        inputs=inputs,
        dt_out=dt,
        deviation=deviation,
        nl=nl,
        linear_range=linear_range,
        compensated=compensated,
    )
