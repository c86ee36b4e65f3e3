"""
Event-driven model of the 8-bit dual-edge asynchronous pipelined SAR TDC.

A residual Δ_k = t_p - t_n travels down the pipeline. At stage k the
comparator decides b_k = (Δ_k >= 0) and the edge that arrived first is
delayed by the stage's ΔT, so Δ_{k+1} = Δ_k - (2 b_k - 1) ΔT_k. Every
delay-element traversal (common propagation of each edge plus the
selected ΔT element) adds independent Gaussian jitter. Rising-edge and
falling-edge conversions land in two separate flip-flop banks.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Iterator, overload

import numpy as np

from src.core import ConfigurationError, EdgePair, InputError, Polarity, RngStream, TimeFs

from .comparator import decide
from .config import N_STAGES, TdcConfig
from .delay import delay_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConversionRecord:
    """Per-sample output of the TDC."""

    code: int
    polarity: Polarity
    decisions: tuple[bool, ...]
    metastable_flags: tuple[bool, ...]
    residuals: tuple[TimeFs, ...]
    sample_index: int
    out_of_range: bool = False
    resolve_latency: TimeFs = 0.0

    def to_dict(self) -> dict:
        return {
            "sample_index": self.sample_index,
            "polarity": self.polarity.value,
            "code": self.code,
            "decisions": [int(b) for b in self.decisions],
            "metastable_flags": [int(m) for m in self.metastable_flags],
            "residuals_fs": list(self.residuals),
            "out_of_range": self.out_of_range,
            "resolve_latency_fs": self.resolve_latency,
        }


@dataclass
class ConversionBatch:
    """
    Array form of many conversions on one bank.

    ``codes`` are ``bit_depth``-bit codes built MSB-first from the enabled
    decisions; with the default depth they are the full 8-bit codes.
    """

    polarity: Polarity
    bit_depth: int
    codes: np.ndarray
    decisions: np.ndarray
    metastable: np.ndarray
    residuals: np.ndarray
    out_of_range: np.ndarray
    resolve_latency: np.ndarray

    def __len__(self) -> int:
        return int(self.codes.size)

    def record(self, position: int, sample_index: int) -> ConversionRecord:
        return ConversionRecord(
            code=int(self.codes[position]),
            polarity=self.polarity,
            decisions=tuple(bool(b) for b in self.decisions[position]),
            metastable_flags=tuple(bool(m) for m in self.metastable[position]),
            residuals=tuple(float(r) for r in self.residuals[position]),
            sample_index=sample_index,
            out_of_range=bool(self.out_of_range[position]),
            resolve_latency=float(self.resolve_latency[position]),
        )


class ConversionStream(Sequence):
    """Records in sample order, with access to the two synchronization banks."""

    def __init__(self, records: Sequence[ConversionRecord]):
        self._records = list(records)

    @overload
    def __getitem__(self, index: int) -> ConversionRecord: ...

    @overload
    def __getitem__(self, index: slice) -> list[ConversionRecord]: ...

    def __getitem__(self, index):
        return self._records[index]

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[ConversionRecord]:
        return iter(self._records)

    def bank(self, polarity: Polarity) -> list[ConversionRecord]:
        return [r for r in self._records if r.polarity is polarity]

    @property
    def rising(self) -> list[ConversionRecord]:
        return self.bank(Polarity.RISING)

    @property
    def falling(self) -> list[ConversionRecord]:
        return self.bank(Polarity.FALLING)

    def codes(self, polarity: Polarity | None = None) -> np.ndarray:
        """Output codes, either interleaved or of one bank."""
        records = self._records if polarity is None else self.bank(polarity)
        return np.array([r.code for r in records], dtype=np.int64)


def convert_batch(
    dt,
    polarity: Polarity,
    cfg: TdcConfig,
    rng: RngStream,
    bit_depth: int = N_STAGES,
) -> ConversionBatch:
    """
    Convert many time differences on one polarity bank.

    Args:
        dt: Initial residuals Δ_1 in fs (scalar or array)
        polarity: Bank whose ΔT parameters apply
        cfg: TDC configuration
        rng: Stream for jitter and unresolved metastability
        bit_depth: Number of leading decisions enabled (1..8)

    Returns:
        ConversionBatch holding codes, decisions, flags and residuals
    """
    if not 1 <= bit_depth <= N_STAGES:
        raise ConfigurationError(
            f"bit_depth must lie in [1, {N_STAGES}], got {bit_depth}", field="bit_depth"
        )
    delta = np.atleast_1d(np.asarray(dt, dtype=float)).copy()
    n = delta.size
    delays = delay_table(cfg, polarity)
    sigma = cfg.jitter_sigma

    decisions = np.zeros((n, bit_depth), dtype=bool)
    metastable = np.zeros((n, bit_depth), dtype=bool)
    residuals = np.zeros((n, bit_depth), dtype=float)
    latency = np.zeros(n, dtype=float)
    out_of_range = np.abs(delta) > 0.5 * cfg.t_fs

    for k in range(bit_depth):
        residuals[:, k] = delta
        bits, meta = decide(delta, cfg, rng)
        decisions[:, k] = bits
        metastable[:, k] = meta
        if cfg.meta_resolver:
            latency += meta * cfg.meta_latency_bound
        if k == bit_depth - 1:
            break
        if sigma > 0:
            jitter = rng.normal(sigma, (n, 3))
            delta = delta + (jitter[:, 0] - jitter[:, 1])
            delayed = delays[k] + jitter[:, 2]
        else:
            delayed = delays[k]
        delta = delta + np.where(bits, -delayed, delayed)

    weights = 1 << np.arange(bit_depth - 1, -1, -1, dtype=np.int64)
    codes = decisions.astype(np.int64) @ weights
    return ConversionBatch(
        polarity=polarity,
        bit_depth=bit_depth,
        codes=codes,
        decisions=decisions,
        metastable=metastable,
        residuals=residuals,
        out_of_range=out_of_range,
        resolve_latency=latency,
    )


def convert_pair(pair: EdgePair, cfg: TdcConfig, rng: RngStream) -> ConversionRecord:
    """
    Convert one edge pair.

    Inputs beyond ±t_fs/2 are still converted (codes saturate) and the
    record is flagged out of range.
    """
    batch = convert_batch(pair.dt, pair.polarity, cfg, rng)
    record = batch.record(0, pair.sample_index)
    if record.out_of_range:
        logger.debug(f"Sample {pair.sample_index}: |Δ1| = {abs(pair.dt):.1f} fs beyond full scale")
    return record


def convert_stream(
    pairs: Sequence[EdgePair], cfg: TdcConfig, rng: RngStream
) -> ConversionStream:
    """
    Convert a ping-pong stream of edge pairs.

    Each bank is converted on its own substream (rising 0, falling 1), so
    the banks are independent of each other's length and draw order.

    Args:
        pairs: Edge pairs whose polarity follows sample_index parity
        cfg: TDC configuration
        rng: Parent stream

    Returns:
        ConversionStream in input order

    Raises:
        InputError: If a pair's polarity does not match its sample index
    """
    positions: dict[Polarity, list[int]] = {Polarity.RISING: [], Polarity.FALLING: []}
    for position, pair in enumerate(pairs):
        expected = Polarity.for_index(pair.sample_index)
        if pair.polarity is not expected:
            raise InputError(
                f"sample {pair.sample_index} arrived on the {pair.polarity.value} edge, "
                f"expected {expected.value}"
            )
        positions[pair.polarity].append(position)

    records: list[ConversionRecord | None] = [None] * len(pairs)
    for polarity, indices in positions.items():
        if not indices:
            continue
        batch = convert_batch(
            [pairs[i].dt for i in indices], polarity, cfg, rng.substream(polarity.bank)
        )
        for offset, position in enumerate(indices):
            records[position] = batch.record(offset, pairs[position].sample_index)

    out_of_range = sum(r.out_of_range for r in records)
    if out_of_range:
        logger.warning(f"{out_of_range} of {len(records)} samples exceeded the TDC full scale")
    return ConversionStream(records)
