"""
Delay-chain transition counting as a power proxy.

A single-edge converter sends a data edge and a reset edge through every
delay element for each sample; the dual-edge converter alternates the
polarity of consecutive samples and never resets, so each element toggles
once per sample.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from src.core import ConfigurationError

CHAIN_NOTE = (
    "Reduction counts delay-chain transitions only; the chain-level 40% figure "
    "includes non-chain overhead (see overhead_per_element)."
)


class ToggleMode(str, Enum):
    SINGLE_EDGE = "single_edge"
    DUAL_EDGE = "dual_edge"


EDGES_PER_SAMPLE = {ToggleMode.SINGLE_EDGE: 2, ToggleMode.DUAL_EDGE: 1}


@dataclass(frozen=True)
class ToggleReport:
    mode: ToggleMode
    n_delay_elements: int
    n_samples: int
    transitions: int
    transitions_per_sample_per_element: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "n_delay_elements": self.n_delay_elements,
            "n_samples": self.n_samples,
            "transitions": self.transitions,
            "transitions_per_sample_per_element": self.transitions_per_sample_per_element,
        }


def element_levels(mode: ToggleMode, n_samples: int) -> np.ndarray:
    """Logic level of one delay element over a run of n_samples conversions."""
    edges = EDGES_PER_SAMPLE[ToggleMode(mode)] * n_samples
    return np.arange(edges + 1) % 2


def count_transitions(mode: ToggleMode, n_delay_elements: int, n_samples: int) -> int:
    """Toggles summed over every element of the chain."""
    per_element = int(np.count_nonzero(np.diff(element_levels(mode, n_samples))))
    return per_element * n_delay_elements


def toggle_report(
    mode: ToggleMode,
    n_delay_elements: int,
    n_samples: int,
    overhead_per_element: float = 0.0,
) -> ToggleReport:
    """
    Count transitions of one converter mode.

    Args:
        mode: Single-edge (with reset) or dual-edge operation
        n_delay_elements: Elements in the chain (> 0)
        n_samples: Number of conversions (>= 0)
        overhead_per_element: Non-chain transitions per sample per element
            charged to both modes

    Returns:
        ToggleReport
    """
    mode = ToggleMode(mode)
    if n_delay_elements < 1:
        raise ConfigurationError(
            f"n_delay_elements must be positive, got {n_delay_elements}",
            field="power.n_delay_elements",
        )
    if n_samples < 0:
        raise ConfigurationError(
            f"n_samples must be non-negative, got {n_samples}", field="power.n_samples"
        )
    if overhead_per_element < 0:
        raise ConfigurationError(
            f"overhead_per_element must be non-negative, got {overhead_per_element}",
            field="power.overhead_per_element",
        )
    chain = count_transitions(mode, n_delay_elements, n_samples)
    overhead = overhead_per_element * n_delay_elements * n_samples
    return ToggleReport(
        mode=mode,
        n_delay_elements=n_delay_elements,
        n_samples=n_samples,
        transitions=int(round(chain + overhead)),
        transitions_per_sample_per_element=EDGES_PER_SAMPLE[mode] + overhead_per_element,
    )


def toggle_compare(
    n_delay_elements: int,
    n_samples: int,
    overhead_per_element: float = 0.0,
) -> tuple[ToggleReport, ToggleReport, float]:
    """
    Compare single-edge and dual-edge chain activity.

    Returns:
        (single, dual, reduction) with reduction = 1 - dual/single rate
    """
    single = toggle_report(ToggleMode.SINGLE_EDGE, n_delay_elements, n_samples, overhead_per_element)
    dual = toggle_report(ToggleMode.DUAL_EDGE, n_delay_elements, n_samples, overhead_per_element)
    reduction = 1.0 - (
        dual.transitions_per_sample_per_element / single.transitions_per_sample_per_element
    )
    return single, dual, reduction
