"""
Experiment orchestration.

Each command maps onto one measurement: it builds the converter from the
resolved spec, runs the measurement, writes its artifacts and returns a
flat metric summary. Random streams are derived from the spec seed only,
so identical spec and seed give byte-identical artifacts.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import structlog

from src.adc import TimeDomainAdc
from src.analysis import (
    DEVIATION_COLUMNS,
    FREQUENCY_COLUMNS,
    bank_spectral_metrics,
    code_density_linearity,
    dt_deviation_sweep,
    frequency_sweep,
    spectral_metrics,
    toggle_compare,
)
from src.analysis.power import CHAIN_NOTE
from src.calib import calibration_overlay, run_foreground_calibration
from src.config import Settings, get_settings
from src.core import ExitCode, Polarity, RngStream, SimulatorError, max_sampling_rate, timing_feasible
from src.tdc import ddu_sweep
from src.vtc import SignalKind, sample_signal, signal_diffs, transfer_curve

from .artifacts import build_provenance, write_csv, write_json, write_toml
from .spec import Command, ExperimentSpec, OutputFormat

logger = logging.getLogger(__name__)

# top-level stream ids per purpose
CONVERSION_STREAM = 0
CALIBRATION_STREAM = 1
VERIFICATION_STREAM = 2
MONTE_CARLO_STREAM = 3


@dataclass
class RunResult:
    """Outcome of one experiment run."""

    command: Command
    exit_code: ExitCode
    summary: dict[str, Any] = field(default_factory=dict)
    artifacts: list[Path] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def summary_lines(self, float_format: str = ".6f") -> list[str]:
        lines = []
        for name, value in self.summary.items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = format(value, float_format)
            else:
                text = str(value)
            lines.append(f"{name} = {text}")
        return lines


@dataclass
class _Context:
    spec: ExperimentSpec
    settings: Settings
    provenance: dict[str, Any]
    artifacts: list[Path] = field(default_factory=list)

    def rng(self, stream_id: int) -> RngStream:
        return RngStream(self.spec.seed, stream_id)

    def sidecar(self, suffix: str) -> Path:
        return self.spec.output_path.with_suffix(suffix)

    def emit(
        self,
        columns: list[str],
        rows: list[dict[str, Any]],
        payload: dict[str, Any],
        path: Optional[Path] = None,
    ) -> None:
        """Write the main artifact in the spec's output format."""
        path = path or self.spec.output_path
        if self.spec.output_format is OutputFormat.CSV:
            written = write_csv(path, columns, rows, self.provenance, self.settings.float_format)
        else:
            written = write_json(path, payload, self.provenance)
        self.artifacts.append(written)

    def emit_json(self, path: Path, payload: dict[str, Any]) -> None:
        self.artifacts.append(write_json(path, payload, self.provenance))


# =============================================================================
# Command handlers
# =============================================================================


def _simulate(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    adc = TimeDomainAdc(spec.adc)
    n = spec.adc.n_samples
    samples = sample_signal(spec.stimulus, spec.adc.f_s, n)
    stream = adc.convert(samples, ctx.rng(CONVERSION_STREAM))
    codes = stream.codes()

    rows = [
        {
            "sample_index": record.sample_index,
            "polarity": record.polarity.value,
            "code": record.code,
            "metastable": any(record.metastable_flags),
            "out_of_range": record.out_of_range,
        }
        for record in stream
    ]
    summary: dict[str, Any] = {
        "n_samples": n,
        "out_of_range": sum(record.out_of_range for record in stream),
        "metastable_samples": sum(any(record.metastable_flags) for record in stream),
    }
    payload: dict[str, Any] = {"codes": codes, "records": rows}

    kind = spec.stimulus.kind
    if kind is SignalKind.SINE:
        overall = spectral_metrics(codes, spec.stimulus.signal_bin, n, spec.window)
        banks = bank_spectral_metrics(codes, spec.stimulus.signal_bin, n, spec.window)
        metrics = {
            "overall": overall.to_dict(),
            **{name: bank.to_dict() for name, bank in banks.items()},
        }
        ctx.provenance["warnings"].extend(overall.warnings)
        summary.update(
            sndr_db=overall.sndr_db,
            sfdr_db=overall.sfdr_db,
            enob=overall.enob,
            rising_sndr_db=banks["rising"].sndr_db,
            falling_sndr_db=banks["falling"].sndr_db,
        )
        payload["spectral"] = metrics
        sidecar = ("spectral", ".metrics.json", metrics)
    elif kind is SignalKind.RAMP:
        report = code_density_linearity(codes, spec.adc.tdc.n_bits)
        summary.update(
            max_abs_dnl=report.max_abs_dnl,
            max_abs_inl=report.max_abs_inl,
            missing_codes=len(report.missing_codes),
        )
        payload["linearity"] = report.to_dict()
        sidecar = ("linearity", ".linearity.json", report.to_dict())
    else:
        summary["mean_code"] = float(codes.mean()) if codes.size else float("nan")
        sidecar = None

    columns = ["sample_index", "polarity", "code", "metastable", "out_of_range"]
    ctx.emit(columns, rows, payload)
    if sidecar is not None and spec.output_format is OutputFormat.CSV:
        name, suffix, content = sidecar
        ctx.emit_json(ctx.sidecar(suffix), {name: content})
    return summary


def _vtc_curve(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    n_points = spec.sweep.n_points
    raw = transfer_curve(spec.adc.vtc, n_points, compensated=False)
    comp = transfer_curve(spec.adc.vtc, n_points, compensated=True)
    rows = [
        {
            "input": float(x),
            "dt_uncompensated_fs": float(du),
            "dt_compensated_fs": float(dc),
            "deviation_uncompensated_fs": float(eu),
            "deviation_compensated_fs": float(ec),
        }
        for x, du, dc, eu, ec in zip(
            raw.inputs, raw.dt_out, comp.dt_out, raw.deviation, comp.deviation
        )
    ]
    improvement = raw.nl / comp.nl if comp.nl > 0 else float("inf")
    ctx.emit(
        list(rows[0]),
        rows,
        {"uncompensated": raw.to_dict(), "compensated": comp.to_dict(), "curve": rows},
    )
    return {
        "nl_uncompensated": raw.nl,
        "nl_compensated": comp.nl,
        "nl_improvement": improvement,
        "linear_range_uncompensated_fs": raw.linear_range,
        "linear_range_compensated_fs": comp.linear_range,
    }


def _ddu_sweep(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    stage = spec.adc.tdc.stage(spec.sweep.stage)
    polarities = (
        list(Polarity) if spec.sweep.swept == "both" else [Polarity(spec.sweep.swept)]
    )
    sweeps = [ddu_sweep(stage, polarity) for polarity in polarities]
    rows = [row for sweep in sweeps for row in sweep.rows()]
    summary: dict[str, Any] = {"stage": stage.index}
    for sweep in sweeps:
        summary[f"{sweep.swept.value}_sweep_tuning_span_fs"] = sweep.tuning_span
        summary[f"{sweep.held.value}_coupled_shift_fs"] = sweep.coupled_shift
    ctx.emit(
        ["stage", "swept", "code", "t_rise_fs", "t_fall_fs"],
        rows,
        {"sweeps": rows, "summary": summary},
    )
    return summary


def _sweep_dt(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    sweep = dt_deviation_sweep(
        spec.adc,
        spec.sweep.sigma_dt_grid,
        spec.sweep.jitter_sigma,
        spec.trials,
        ctx.rng(MONTE_CARLO_STREAM),
        signal=spec.stimulus.model_copy(update={"kind": SignalKind.SINE}),
        n_fft=spec.sweep.n_fft,
        workers=ctx.settings.workers,
    )
    rows = sweep.rows()
    ctx.emit(
        DEVIATION_COLUMNS,
        rows,
        {"points": rows, "jitter_sigma_fs": sweep.jitter_sigma, "trials": sweep.trials,
         "sigma_dt_unit": "fraction of T_LSB"},
    )
    first, last = sweep.points[0], sweep.points[-1]
    return {
        "points": len(rows),
        "sndr_db_at_min_sigma": first.sndr_db_mean,
        "sndr_db_at_max_sigma": last.sndr_db_mean,
        "sfdr_db_at_max_sigma": last.sfdr_db_mean,
    }


def _sweep_freq(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    sweep = frequency_sweep(
        spec.adc,
        spec.sweep.signal_bins,
        spec.trials,
        ctx.rng(MONTE_CARLO_STREAM),
        signal=spec.stimulus.model_copy(update={"kind": SignalKind.SINE}),
        n_fft=spec.sweep.n_fft,
        workers=ctx.settings.workers,
    )
    rows = sweep.rows()
    ctx.emit(FREQUENCY_COLUMNS, rows, {"points": rows, "trials": spec.trials})
    worst = min(sweep.points, key=lambda point: point.sndr_db_mean)
    return {
        "points": len(rows),
        "worst_sndr_db": worst.sndr_db_mean,
        "worst_signal_bin": int(worst.value),
    }


def _calibrate(ctx: _Context) -> dict[str, Any]:
    spec = ctx.spec
    adc = TimeDomainAdc(spec.adc)
    report = run_foreground_calibration(adc, spec.calib, ctx.rng(CALIBRATION_STREAM))

    payload = report.to_dict()
    summary: dict[str, Any] = {
        "converged": report.converged,
        "failed_stages": len(report.failed_stages()),
        "total_histograms": report.total_histograms,
        "pre_max_dnl_rising": report.pre_max_dnl["rising"],
        "pre_max_dnl_falling": report.pre_max_dnl["falling"],
        "post_max_dnl_rising": report.post_max_dnl["rising"],
        "post_max_dnl_falling": report.post_max_dnl["falling"],
    }
    stimulus = spec.stimulus
    if stimulus.kind is SignalKind.SINE:
        n = spec.adc.n_samples
        codes = adc.convert_codes(
            signal_diffs(stimulus, spec.adc.f_s, n), ctx.rng(VERIFICATION_STREAM)
        )
        metrics = spectral_metrics(codes, stimulus.signal_bin, n, spec.window)
        payload["post_calibration_spectral"] = metrics.to_dict()
        summary["post_sndr_db"] = metrics.sndr_db

    rows = [entry.to_dict() for entry in report.per_stage]
    ctx.emit(list(rows[0]) if rows else [], rows, payload)
    ctx.artifacts.append(
        write_toml(ctx.sidecar(".overlay.toml"), calibration_overlay(adc.tdc), ctx.provenance)
    )
    return summary


def _power_compare(ctx: _Context) -> dict[str, Any]:
    power = ctx.spec.power
    single, dual, reduction = toggle_compare(
        power.n_delay_elements, power.n_samples, power.overhead_per_element
    )
    rows = [single.to_dict(), dual.to_dict()]
    ctx.emit(
        list(rows[0]),
        rows,
        {"single": rows[0], "dual": rows[1], "reduction": reduction, "note": CHAIN_NOTE},
    )
    return {
        "single_transitions": single.transitions,
        "dual_transitions": dual.transitions,
        "reduction": reduction,
    }


def _feasibility(ctx: _Context) -> dict[str, Any]:
    adc = ctx.spec.adc
    budget = adc.timing_budget()
    result = {
        "t_s_fs": budget.t_s,
        "t_fs_fs": budget.t_fs,
        "t_m_fs": budget.t_m,
        "t_reset_fs": budget.t_reset,
        "feasible_with_reset": timing_feasible(budget, reset_free=False),
        "feasible_reset_free": timing_feasible(budget, reset_free=True),
        "max_rate_with_reset_hz": max_sampling_rate(budget.t_fs, budget.t_m, budget.t_reset),
        "max_rate_reset_free_hz": max_sampling_rate(
            budget.t_fs, budget.t_m, budget.t_reset, reset_free=True
        ),
    }
    result["feasible"] = result["feasible_reset_free" if adc.reset_free else "feasible_with_reset"]
    ctx.emit(list(result), [result], result)
    return result


HANDLERS: dict[Command, Callable[[_Context], dict[str, Any]]] = {
    Command.SIMULATE: _simulate,
    Command.VTC_CURVE: _vtc_curve,
    Command.DDU_SWEEP: _ddu_sweep,
    Command.SWEEP_DT: _sweep_dt,
    Command.SWEEP_FREQ: _sweep_freq,
    Command.CALIBRATE: _calibrate,
    Command.POWER_COMPARE: _power_compare,
    Command.FEASIBILITY: _feasibility,
}


def run(spec: ExperimentSpec, settings: Optional[Settings] = None) -> RunResult:
    """
    Execute one experiment and write its artifacts.

    Args:
        spec: Resolved experiment spec
        settings: Process settings (defaults to the cached settings)

    Returns:
        RunResult with the metric summary and written paths

    Raises:
        SimulatorError: Any module error, carrying its exit code
    """
    settings = settings or get_settings()
    log = structlog.get_logger(__name__).bind(command=spec.command.value, seed=spec.seed)
    provenance = build_provenance(spec.command.value, spec.seed, spec.echo(), spec.warnings)
    ctx = _Context(spec=spec, settings=settings, provenance=provenance)

    log.info(
        "run_started",
        source=spec.source,
        overlay=spec.overlay,
        output=spec.output_path.as_posix(),
    )
    for warning in spec.warnings:
        log.warning("spec_warning", message=warning)
    try:
        summary = HANDLERS[spec.command](ctx)
    except SimulatorError as exc:
        log.error("run_failed", error=type(exc).__name__, exit_code=int(exc.exit_code))
        raise
    for path in ctx.artifacts:
        log.info("artifact_written", path=path.as_posix())
    log.info("run_finished", **{k: v for k, v in summary.items() if not isinstance(v, float)})
    return RunResult(
        command=spec.command,
        exit_code=ExitCode.OK,
        summary=summary,
        artifacts=list(ctx.artifacts),
        warnings=list(provenance["warnings"]),
    )
