"""8-bit dual-edge asynchronous pipelined SAR time-to-digital converter."""

from .comparator import compare, decide
from .config import (
    CONV_MAX_CODE,
    CONV_MID_CODE,
    DDU_MAX_CODE,
    DDU_MID_CODE,
    DDU_STEP,
    N_STAGES,
    DduSetting,
    StageConfig,
    TdcConfig,
)
from .converter import (
    ConversionBatch,
    ConversionRecord,
    ConversionStream,
    convert_batch,
    convert_pair,
    convert_stream,
)
from .delay import DduSweep, ddu_sweep, delay_table, effective_dt

__all__ = [
    "compare",
    "decide",
    "CONV_MAX_CODE",
    "CONV_MID_CODE",
    "DDU_MAX_CODE",
    "DDU_MID_CODE",
    "DDU_STEP",
    "N_STAGES",
    "DduSetting",
    "StageConfig",
    "TdcConfig",
    "ConversionBatch",
    "ConversionRecord",
    "ConversionStream",
    "convert_batch",
    "convert_pair",
    "convert_stream",
    "DduSweep",
    "ddu_sweep",
    "delay_table",
    "effective_dt",
]
