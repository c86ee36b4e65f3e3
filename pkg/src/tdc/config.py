"""
Configuration models of the pipelined SAR time-to-digital converter.

Stage k (k = 1..7) subtracts ΔT_k = t_fs / 2^(k+1) from the residual time
difference; stage 8 only compares. Each ΔT is trimmed by a decoupled delay
unit (independent 4-bit rise/fall codes) and, from stage 2 on, a 2-bit
conventional delay cell that moves both edges by unequal amounts.
"""

from collections.abc import Sequence
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core import ConfigurationError, Polarity, TimeFs, time_fs

N_STAGES = 8
DDU_MAX_CODE = 15
DDU_MID_CODE = 8
CONV_MAX_CODE = 3
CONV_MID_CODE = 1

# Trim granularity of the nominal design
DDU_STEP = 24.4140625  # 1/16 LSB at t_fs = 100 ps
CONV_STEP_RISE = 195.3125
CONV_STEP_FALL = 253.90625  # conventional cells load the falling edge 1.3x harder

# Worst-case coupled shift over a full sweep of the opposite code
COUPLE_RF_BOUND = 220.0
COUPLE_FR_BOUND = 90.0
COUPLE_RF_NOMINAL = 195.3125
COUPLE_FR_NOMINAL = 78.125


class DduSetting(BaseModel):
    """Decoupled delay unit: independently tunable rising and falling delays."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    code_rise: int = Field(default=DDU_MID_CODE, ge=0, le=DDU_MAX_CODE)
    code_fall: int = Field(default=DDU_MID_CODE, ge=0, le=DDU_MAX_CODE)
    step_rise: TimeFs = Field(default=DDU_STEP, gt=0)
    step_fall: TimeFs = Field(default=DDU_STEP, gt=0)
    couple_rf: TimeFs = Field(
        default=COUPLE_RF_NOMINAL, ge=0, description="Rise shift over a full code_fall sweep"
    )
    couple_fr: TimeFs = Field(
        default=COUPLE_FR_NOMINAL, ge=0, description="Fall shift over a full code_rise sweep"
    )
    base_rise: TimeFs = 0.0
    base_fall: TimeFs = 0.0


class StageConfig(BaseModel):
    """One SAR stage: comparator plus the ΔT delay path for each edge."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    index: int = Field(..., ge=1, le=N_STAGES)
    dt_nominal: TimeFs = Field(..., ge=0)
    ddu: DduSetting = Field(default_factory=DduSetting)
    conv_code: int = Field(default=CONV_MID_CODE, ge=0, le=CONV_MAX_CODE)
    conv_step_rise: TimeFs = Field(default=CONV_STEP_RISE, ge=0)
    conv_step_fall: TimeFs = Field(default=CONV_STEP_FALL, ge=0)
    mismatch_rise: TimeFs = 0.0
    mismatch_fall: TimeFs = 0.0
    has_conventional: bool = True

    @model_validator(mode="after")
    def _check_layout(self) -> "StageConfig":
        if self.has_conventional != (self.index != 1):
            raise ValueError("only the first stage omits the conventional delay cells")
        if self.index == N_STAGES and self.dt_nominal != 0:
            raise ValueError(f"stage {N_STAGES} applies no ΔT")
        return self

    @property
    def applies_delay(self) -> bool:
        return self.index < N_STAGES

    def tuning(self, polarity: Polarity) -> TimeFs:
        """Delay contributed by the tuning codes on one edge."""
        ddu = self.ddu
        if polarity is Polarity.RISING:
            total = ddu.code_rise * ddu.step_rise + (ddu.code_fall / DDU_MAX_CODE) * ddu.couple_rf
            if self.has_conventional:
                total += self.conv_code * self.conv_step_rise
        else:
            total = ddu.code_fall * ddu.step_fall + (ddu.code_rise / DDU_MAX_CODE) * ddu.couple_fr
            if self.has_conventional:
                total += self.conv_code * self.conv_step_fall
        return total

    def with_codes(
        self,
        code_rise: Optional[int] = None,
        code_fall: Optional[int] = None,
        conv_code: Optional[int] = None,
    ) -> "StageConfig":
        """Copy with some tuning codes replaced (range-checked)."""
        ddu_update = {}
        if code_rise is not None:
            ddu_update["code_rise"] = code_rise
        if code_fall is not None:
            ddu_update["code_fall"] = code_fall
        for name, value in ddu_update.items():
            if not 0 <= value <= DDU_MAX_CODE:
                raise ConfigurationError(f"{name} {value} outside [0, {DDU_MAX_CODE}]", field=name)
        update: dict = {"ddu": self.ddu.model_copy(update=ddu_update)}
        if conv_code is not None:
            if not 0 <= conv_code <= CONV_MAX_CODE:
                raise ConfigurationError(
                    f"conv_code {conv_code} outside [0, {CONV_MAX_CODE}]", field="conv_code"
                )
            update["conv_code"] = conv_code
        return self.model_copy(update=update)

    @classmethod
    def nominal(
        cls,
        index: int,
        t_fs: TimeFs = 100_000.0,
        ddu: Optional[DduSetting] = None,
        **overrides,
    ) -> "StageConfig":
        """
        Stage with mid-scale codes whose base offsets cancel the tuning.

        The bases are the exact negation of the mid-scale tuning, so the
        effective delay equals dt_nominal bit-for-bit until a code moves.
        """
        dt_nominal = t_fs / (1 << (index + 1)) if index < N_STAGES else 0.0
        stage = cls(
            index=index,
            dt_nominal=dt_nominal,
            ddu=ddu or DduSetting(),
            has_conventional=index != 1,
            **overrides,
        )
        bases = {
            "base_rise": -stage.tuning(Polarity.RISING),
            "base_fall": -stage.tuning(Polarity.FALLING),
        }
        return stage.model_copy(update={"ddu": stage.ddu.model_copy(update=bases)})


class TdcConfig(BaseModel):
    """Full TDC parameterization: eight stages plus timing non-idealities."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    stages: tuple[StageConfig, ...]
    t_fs: TimeFs = Field(default=100_000.0, gt=0)
    jitter_sigma: TimeFs = Field(default=0.0, ge=0, description="Per delay-element traversal")
    meta_window: TimeFs = Field(default=10.0, ge=0)
    meta_resolver: bool = True
    meta_latency_bound: TimeFs = Field(default=5_000.0, ge=0)

    @model_validator(mode="after")
    def _check_stages(self) -> "TdcConfig":
        if len(self.stages) != N_STAGES:
            raise ValueError(f"expected {N_STAGES} stages, got {len(self.stages)}")
        for position, stage in enumerate(self.stages, start=1):
            if stage.index != position:
                raise ValueError(f"stage at position {position} has index {stage.index}")
        return self

    @property
    def n_bits(self) -> int:
        return N_STAGES

    @property
    def lsb(self) -> TimeFs:
        return self.t_fs / (1 << N_STAGES)

    @classmethod
    def nominal(cls, t_fs: TimeFs = 100_000.0, **overrides) -> "TdcConfig":
        """Nominal design: default coupling, mid-scale codes, 10 fs metastability window."""
        stages = tuple(StageConfig.nominal(k, t_fs) for k in range(1, N_STAGES + 1))
        return cls(stages=stages, t_fs=t_fs, **overrides)

    @classmethod
    def ideal(cls, t_fs: TimeFs = 100_000.0) -> "TdcConfig":
        """Zero coupling, mismatch, jitter and metastability window."""
        ddu = DduSetting(couple_rf=0.0, couple_fr=0.0)
        stages = tuple(StageConfig.nominal(k, t_fs, ddu=ddu) for k in range(1, N_STAGES + 1))
        return cls(stages=stages, t_fs=t_fs, jitter_sigma=0.0, meta_window=0.0)

    def stage(self, index: int) -> StageConfig:
        return self.stages[index - 1]

    def with_stage(self, stage: StageConfig) -> "TdcConfig":
        stages = list(self.stages)
        stages[stage.index - 1] = stage
        return self.model_copy(update={"stages": tuple(stages)})

    def with_mismatch(
        self,
        rise: Optional[Sequence[float]] = None,
        fall: Optional[Sequence[float]] = None,
    ) -> "TdcConfig":
        """
        Add per-stage mismatch vectors (length 8) to the current values.

        Raises:
            ConfigurationError: If a vector has the wrong length or a
                resulting mismatch is not a finite time
        """
        for name, vector in (("mismatch_rise", rise), ("mismatch_fall", fall)):
            if vector is not None and len(vector) != N_STAGES:
                raise ConfigurationError(
                    f"{name} needs {N_STAGES} entries, got {len(vector)}", field=name
                )
        stages = []
        for position, stage in enumerate(self.stages):
            update = {}
            if rise is not None:
                update["mismatch_rise"] = time_fs(
                    stage.mismatch_rise + float(rise[position]), "mismatch_rise"
                )
            if fall is not None:
                update["mismatch_fall"] = time_fs(
                    stage.mismatch_fall + float(fall[position]), "mismatch_fall"
                )
            stages.append(stage.model_copy(update=update))
        return self.model_copy(update={"stages": tuple(stages)})
