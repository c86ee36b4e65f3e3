"""
Code-density (histogram) linearity test with a uniform ramp stimulus.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from src.core import InputError, StatisticsError

MIN_HITS_PER_CODE = 64


class Stimulus(str, Enum):
    UNIFORM_RAMP = "uniform_ramp"


@dataclass
class LinearityReport:
    """DNL/INL of the interior codes (endpoints excluded)."""

    dnl: np.ndarray
    inl: np.ndarray
    max_abs_dnl: float
    max_abs_inl: float
    missing_codes: list[int]
    n_bits: int
    hits_per_code: float

    def to_dict(self, include_arrays: bool = True) -> dict[str, Any]:
        record = {
            "n_bits": self.n_bits,
            "max_abs_dnl": self.max_abs_dnl,
            "max_abs_inl": self.max_abs_inl,
            "missing_codes": list(self.missing_codes),
            "hits_per_code": self.hits_per_code,
        }
        if include_arrays:
            record["dnl"] = [float(v) for v in self.dnl]
            record["inl"] = [float(v) for v in self.inl]
        return record

    def rows(self) -> list[dict]:
        """Per-code table; row i describes code i + 1."""
        return [
            {"code": code, "dnl_lsb": float(d), "inl_lsb": float(i)}
            for code, d, i in zip(range(1, self.dnl.size + 1), self.dnl, self.inl)
        ]


def code_density_linearity(
    codes,
    n_bits: int,
    stimulus: Stimulus = Stimulus.UNIFORM_RAMP,
) -> LinearityReport:
    """
    Compute DNL and INL from the histogram of a full-scale ramp record.

    DNL_i = h_i / h̄ - 1 over the interior codes, with h̄ their mean count.
    INL is the cumulative DNL with the straight line through its
    endpoints removed, so both INL endpoints are zero.

    Args:
        codes: Output codes of a uniform full-scale ramp
        n_bits: Converter resolution
        stimulus: Stimulus kind (only the uniform ramp is supported)

    Returns:
        LinearityReport

    Raises:
        InputError: If a code lies outside [0, 2^n_bits)
        StatisticsError: If the record averages fewer than 64 hits per code
    """
    stimulus = Stimulus(stimulus)
    codes = np.asarray(codes, dtype=np.int64)
    n_codes = 1 << n_bits
    if codes.size and (codes.min() < 0 or codes.max() >= n_codes):
        raise InputError(f"codes must lie in [0, {n_codes - 1}]")
    hits_per_code = codes.size / n_codes
    if hits_per_code < MIN_HITS_PER_CODE:
        raise StatisticsError(
            f"{codes.size} samples give {hits_per_code:.1f} hits per code, "
            f"need at least {MIN_HITS_PER_CODE}"
        )

    hist = np.bincount(codes, minlength=n_codes)
    interior = hist[1:-1].astype(float)
    mean_hits = interior.mean()
    if mean_hits == 0:
        raise StatisticsError("no samples landed on interior codes")
    dnl = interior / mean_hits - 1.0

    cumulative = np.cumsum(dnl)
    line = np.linspace(cumulative[0], cumulative[-1], cumulative.size)
    inl = cumulative - line

    missing = [int(code) for code in np.flatnonzero(interior == 0) + 1]
    return LinearityReport(
        dnl=dnl,
        inl=inl,
        max_abs_dnl=float(np.max(np.abs(dnl))),
        max_abs_inl=float(np.max(np.abs(inl))),
        missing_codes=missing,
        n_bits=n_bits,
        hits_per_code=float(hits_per_code),
    )
