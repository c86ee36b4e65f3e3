"""
Per-stage ΔT arithmetic and decoupled-delay-unit sweeps.
"""

from dataclasses import dataclass

import numpy as np

from src.core import ConfigurationError, Polarity, TimeFs

from .config import DDU_MAX_CODE, N_STAGES, StageConfig, TdcConfig


def effective_dt(stage: StageConfig, polarity: Polarity) -> TimeFs:
    """
    Delay the stage inserts on the leading edge of the given polarity.

    dt_nominal + mismatch + base + code*step + (opposite code/15)*coupling
    + conventional code*step (stages 2..7). Stage 8 inserts nothing.

    Args:
        stage: Stage configuration
        polarity: Edge polarity being converted

    Returns:
        Effective ΔT in fs
    """
    if not stage.applies_delay:
        return 0.0
    if polarity is Polarity.RISING:
        mismatch, base = stage.mismatch_rise, stage.ddu.base_rise
    else:
        mismatch, base = stage.mismatch_fall, stage.ddu.base_fall
    # base and tuning are summed first so mid-scale codes cancel exactly
    return stage.dt_nominal + mismatch + (base + stage.tuning(polarity))


def delay_table(cfg: TdcConfig, polarity: Polarity) -> np.ndarray:
    """Effective ΔT of all stages for one polarity (index k-1 for stage k)."""
    return np.array([effective_dt(stage, polarity) for stage in cfg.stages])


@dataclass
class DduSweep:
    """Effective rise/fall delays while one DDU code sweeps its full range."""

    stage_index: int
    swept: Polarity
    codes: np.ndarray
    t_rise: np.ndarray
    t_fall: np.ndarray

    @property
    def held(self) -> Polarity:
        return Polarity.FALLING if self.swept is Polarity.RISING else Polarity.RISING

    @property
    def coupled_shift(self) -> TimeFs:
        """Total movement of the held edge across the sweep."""
        held = self.t_fall if self.held is Polarity.FALLING else self.t_rise
        return float(held.max() - held.min())

    @property
    def tuning_span(self) -> TimeFs:
        """Total movement of the swept edge across the sweep."""
        swept = self.t_rise if self.swept is Polarity.RISING else self.t_fall
        return float(swept.max() - swept.min())

    def rows(self) -> list[dict]:
        return [
            {
                "stage": self.stage_index,
                "swept": self.swept.value,
                "code": int(code),
                "t_rise_fs": float(rise),
                "t_fall_fs": float(fall),
            }
            for code, rise, fall in zip(self.codes, self.t_rise, self.t_fall)
        ]


def ddu_sweep(stage: StageConfig, swept: Polarity) -> DduSweep:
    """
    Sweep one DDU code from 0 to 15 holding every other setting.

    Args:
        stage: Stage whose delay unit is swept
        swept: Which code moves (RISING sweeps code_rise)

    Returns:
        DduSweep with both edges' effective delays per code
    """
    if not 1 <= stage.index < N_STAGES:
        raise ConfigurationError(
            f"stage {stage.index} has no delay unit to sweep", field="sweep.stage"
        )
    codes = np.arange(DDU_MAX_CODE + 1)
    rise, fall = [], []
    for code in codes:
        if swept is Polarity.RISING:
            candidate = stage.with_codes(code_rise=int(code))
        else:
            candidate = stage.with_codes(code_fall=int(code))
        rise.append(effective_dt(candidate, Polarity.RISING))
        fall.append(effective_dt(candidate, Polarity.FALLING))
    return DduSweep(
        stage_index=stage.index,
        swept=swept,
        codes=codes,
        t_rise=np.array(rise),
        t_fall=np.array(fall),
    )
