"""
Dual-edge time comparator with metastability.

Inside the metastability window the regenerative loop cannot settle in
time: either the resolver forces a deterministic '1' after a bounded
latency, or the outcome is a fair coin.
"""

import numpy as np

from src.core import RngStream, TimeFs

from .config import TdcConfig


def compare(delta: TimeFs, cfg: TdcConfig, rng: RngStream) -> tuple[bool, bool]:
    """
    Decide the sign of one residual.

    Args:
        delta: Residual time difference in fs
        cfg: TDC configuration (window and resolver)
        rng: Stream for unresolved metastable outcomes

    Returns:
        (decision, metastable)
    """
    if abs(delta) >= cfg.meta_window:
        return bool(delta >= 0), False
    if cfg.meta_resolver:
        return True, True
    return bool(rng.coin()), True


def decide(deltas: np.ndarray, cfg: TdcConfig, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``compare`` over a batch of residuals."""
    metastable = np.abs(deltas) < cfg.meta_window
    decisions = deltas >= 0
    if metastable.any():
        if cfg.meta_resolver:
            decisions = decisions | metastable
        else:
            decisions = decisions.copy()
            decisions[metastable] = rng.coin(int(metastable.sum()))
    return decisions, metastable
