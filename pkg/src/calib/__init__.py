"""Histogram-based foreground calibration of the TDC stage delays."""

from .engine import (
    calibrate_stage,
    calibration_overlay,
    full_depth_max_dnl,
    partial_dnl,
    required_ramp_points,
    run_foreground_calibration,
    stage_codes,
    stage_dnl,
    stage_score,
)
from .schema import CalibReport, CalibSpec, SearchStrategy, StageCalibration

__all__ = [
    "calibrate_stage",
    "calibration_overlay",
    "full_depth_max_dnl",
    "partial_dnl",
    "required_ramp_points",
    "run_foreground_calibration",
    "stage_codes",
    "stage_dnl",
    "stage_score",
    "CalibReport",
    "CalibSpec",
    "SearchStrategy",
    "StageCalibration",
]
