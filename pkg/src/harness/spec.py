"""
Experiment spec files.

A spec is a TOML file of flat ``[section]`` blocks. Every section is a
strict model: unknown keys are rejected with the nearest valid key
suggested, and errors point at the offending line. Missing keys take the
values of the selected ``[adc] preset``; the resolved values are echoed
into every artifact for provenance.
"""

import difflib
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from enum import Enum
from pathlib import Path
from typing import Annotated, Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.adc import AdcConfig
from src.analysis import SpectralWindow
from src.calib import CalibSpec, SearchStrategy, required_ramp_points
from src.config import get_settings
from src.core import FS_PER_SECOND, ConfigurationError, effective_pulse_width
from src.tdc import N_STAGES, DduSetting, StageConfig, TdcConfig
from src.vtc import SignalKind, SignalSpec, VtcConfig, signal_diffs

logger = logging.getLogger(__name__)

Vector8 = Annotated[list[float], Field(min_length=N_STAGES, max_length=N_STAGES)]
CodeVector8 = Annotated[list[int], Field(min_length=N_STAGES, max_length=N_STAGES)]


class Command(str, Enum):
    SIMULATE = "simulate"
    VTC_CURVE = "vtc-curve"
    DDU_SWEEP = "ddu-sweep"
    SWEEP_DT = "sweep-dt"
    SWEEP_FREQ = "sweep-freq"
    CALIBRATE = "calibrate"
    POWER_COMPARE = "power-compare"
    FEASIBILITY = "feasibility"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Preset(str, Enum):
    NOMINAL = "nominal"
    IDEAL = "ideal"


DEFAULT_FORMATS = {
    Command.SIMULATE: OutputFormat.CSV,
    Command.VTC_CURVE: OutputFormat.CSV,
    Command.DDU_SWEEP: OutputFormat.CSV,
    Command.SWEEP_DT: OutputFormat.CSV,
    Command.SWEEP_FREQ: OutputFormat.CSV,
    Command.CALIBRATE: OutputFormat.JSON,
    Command.POWER_COMPARE: OutputFormat.JSON,
    Command.FEASIBILITY: OutputFormat.JSON,
}


# =============================================================================
# Section models
# =============================================================================


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class ExperimentSection(_Section):
    command: Command
    seed: Optional[int] = Field(default=None, ge=0, lt=1 << 64)
    trials: int = Field(default=20, ge=1)
    output_path: Optional[str] = None
    output_format: Optional[OutputFormat] = None
    window: SpectralWindow = SpectralWindow.NONE


class AdcSection(_Section):
    preset: Preset = Preset.NOMINAL
    f_s: Optional[float] = Field(default=None, gt=0)
    n_samples: Optional[int] = Field(default=None, ge=1)


class TimingSection(_Section):
    t_s: Optional[float] = Field(default=None, gt=0)
    t_m: Optional[float] = Field(default=None, ge=0)
    t_reset: Optional[float] = Field(default=None, ge=0)
    reset_free: Optional[bool] = None


class VtcSection(_Section):
    slope_up: Optional[float] = None
    slope_down: Optional[float] = None
    expand_alpha: Optional[float] = None
    comp_gain: Optional[float] = None
    comp_knee: Optional[float] = None
    comp_bias_1: Optional[float] = None
    comp_bias_2: Optional[float] = None
    dead_time: Optional[float] = None
    t_fs_target: Optional[float] = None
    compensate: Optional[bool] = None
    noise_sigma: Optional[float] = None
    resolution_bits: Optional[int] = None


class TdcSection(_Section):
    t_fs: Optional[float] = Field(default=None, gt=0)
    jitter_sigma: Optional[float] = Field(default=None, ge=0)
    meta_window: Optional[float] = Field(default=None, ge=0)
    meta_resolver: Optional[bool] = None
    meta_latency_bound: Optional[float] = Field(default=None, ge=0)
    step_rise: Optional[float] = Field(default=None, gt=0)
    step_fall: Optional[float] = Field(default=None, gt=0)
    couple_rf: Optional[float] = Field(default=None, ge=0)
    couple_fr: Optional[float] = Field(default=None, ge=0)
    conv_step_rise: Optional[float] = Field(default=None, ge=0)
    conv_step_fall: Optional[float] = Field(default=None, ge=0)
    mismatch_rise: Optional[Vector8] = None
    mismatch_fall: Optional[Vector8] = None
    code_rise: Optional[CodeVector8] = None
    code_fall: Optional[CodeVector8] = None
    conv_code: Optional[CodeVector8] = None


class StimulusSection(_Section):
    kind: SignalKind = SignalKind.SINE
    amplitude: float = Field(default=1.0, ge=0)
    signal_bin: int = Field(default=127, ge=1)
    phase: float = 0.0
    dc_level: float = 0.0


class CalibSection(_Section):
    dnl_tolerance: float = Field(default=0.05, gt=0)
    ramp_points: int = Field(default=65_536, ge=1)
    max_iterations_per_stage: int = Field(default=80, ge=1)
    search_strategy: SearchStrategy = SearchStrategy.EXHAUSTIVE
    passes: int = Field(default=2, ge=1)


class SweepSection(_Section):
    sigma_dt_grid: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 2.0, 4.0])
    jitter_sigma: float = Field(default=0.0, ge=0)
    signal_bins: list[int] = Field(default_factory=lambda: [7, 31, 127, 511, 1021, 2039])
    n_fft: Optional[int] = Field(default=None, ge=8)
    stage: int = Field(default=1, ge=1, le=N_STAGES - 1)
    swept: str = Field(default="both", pattern="^(rising|falling|both)$")
    n_points: int = Field(default=64, ge=8)


class PowerSection(_Section):
    n_delay_elements: int = Field(default=56, ge=1)
    n_samples: int = Field(default=1000, ge=0)
    overhead_per_element: float = Field(default=0.0, ge=0)


SECTIONS: dict[str, type[_Section]] = {
    "experiment": ExperimentSection,
    "adc": AdcSection,
    "timing": TimingSection,
    "vtc": VtcSection,
    "tdc": TdcSection,
    "stimulus": StimulusSection,
    "calib": CalibSection,
    "sweep": SweepSection,
    "power": PowerSection,
}


# =============================================================================
# Resolved spec
# =============================================================================


class ExperimentSpec(BaseModel):
    """Fully resolved experiment."""

    model_config = ConfigDict(frozen=True)

    command: Command
    seed: int
    trials: int
    output_path: Path
    output_format: OutputFormat
    window: SpectralWindow
    preset: Preset
    adc: AdcConfig
    stimulus: SignalSpec
    calib: CalibSpec
    sweep: SweepSection
    power: PowerSection
    warnings: tuple[str, ...] = ()
    source: Optional[str] = None
    overlay: Optional[str] = None

    def with_overrides(
        self, seed: Optional[int] = None, output_path: Optional[str | Path] = None
    ) -> "ExperimentSpec":
        """Apply command-line overrides."""
        update: dict[str, Any] = {}
        if seed is not None:
            if not 0 <= seed < 1 << 64:
                raise ConfigurationError(f"seed {seed} is not a 64-bit value", field="seed")
            update["seed"] = seed
        if output_path is not None:
            update["output_path"] = Path(output_path)
        return self.model_copy(update=update)

    def echo(self) -> dict[str, Any]:
        """Every effective value as a flat ``section.key`` mapping."""
        adc = self.adc
        tdc = adc.tdc
        first = tdc.stage(1)
        flat: dict[str, Any] = {
            "experiment.command": self.command.value,
            "experiment.seed": self.seed,
            "experiment.trials": self.trials,
            "experiment.output_format": self.output_format.value,
            "experiment.window": self.window.value,
            "experiment.overlay": self.overlay,
            "adc.preset": self.preset.value,
            "adc.f_s": adc.f_s,
            "adc.n_samples": adc.n_samples,
            "timing.t_s": adc.t_s,
            "timing.t_m": adc.t_m,
            "timing.t_reset": adc.t_reset,
            "timing.reset_free": adc.reset_free,
            "tdc.t_fs": tdc.t_fs,
            "tdc.jitter_sigma": tdc.jitter_sigma,
            "tdc.meta_window": tdc.meta_window,
            "tdc.meta_resolver": tdc.meta_resolver,
            "tdc.meta_latency_bound": tdc.meta_latency_bound,
            "tdc.step_rise": first.ddu.step_rise,
            "tdc.step_fall": first.ddu.step_fall,
            "tdc.couple_rf": first.ddu.couple_rf,
            "tdc.couple_fr": first.ddu.couple_fr,
            "tdc.conv_step_rise": tdc.stage(2).conv_step_rise,
            "tdc.conv_step_fall": tdc.stage(2).conv_step_fall,
            "tdc.mismatch_rise": [s.mismatch_rise for s in tdc.stages],
            "tdc.mismatch_fall": [s.mismatch_fall for s in tdc.stages],
            "tdc.code_rise": [s.ddu.code_rise for s in tdc.stages],
            "tdc.code_fall": [s.ddu.code_fall for s in tdc.stages],
            "tdc.conv_code": [s.conv_code for s in tdc.stages],
        }
        for name, value in adc.vtc.model_dump(mode="json").items():
            flat[f"vtc.{name}"] = value
        for prefix, model in (
            ("stimulus", self.stimulus),
            ("calib", self.calib),
            ("sweep", self.sweep),
            ("power", self.power),
        ):
            for name, value in model.model_dump(mode="json").items():
                flat[f"{prefix}.{name}"] = value
        return dict(sorted(flat.items()))


# =============================================================================
# Loading
# =============================================================================

_SECTION_RE = re.compile(r"^\s*\[\s*([A-Za-z0-9_\-]+)\s*\]")
_KEY_RE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")
_TOML_LINE_RE = re.compile(r"line (\d+)")


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key =`` (and section header, key '') in the file."""
    lines: dict[tuple[str, str], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_RE.match(line)
        if header:
            section = header.group(1)
            lines.setdefault((section, ""), number)
            continue
        key = _KEY_RE.match(line)
        if key:
            lines.setdefault((section, key.group(1)), number)
    return lines


def _suggest(name: str, options) -> Optional[str]:
    matches = difflib.get_close_matches(name, list(options), n=1, cutoff=0.6)
    return matches[0] if matches else None


def _apply_overlay(
    document: dict[str, Any], overlay: str, lines: dict[tuple[str, str], int]
) -> None:
    """Merge an overlay document key by key; overlaid keys lose their spec line."""
    try:
        extra = tomllib.loads(overlay)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"cannot parse overlay: {exc}", field="overlay") from exc
    for name, values in extra.items():
        if name == "experiment":
            raise ConfigurationError(
                "an overlay may not change [experiment]", field="overlay.experiment"
            )
        if name not in SECTIONS:
            raise ConfigurationError(
                f"unknown overlay section [{name}]",
                field=f"overlay.{name}",
                suggestion=_suggest(name, SECTIONS),
            )
        current = document.get(name, {})
        if not isinstance(values, dict) or not isinstance(current, dict):
            raise ConfigurationError(f"[{name}] must be a table", field=f"overlay.{name}")
        document[name] = {**current, **values}
        for key in values:
            lines.pop((name, key), None)


def _parse_section(
    name: str, values: Any, lines: dict[tuple[str, str], int]
) -> _Section:
    model = SECTIONS[name]
    if not isinstance(values, dict):
        raise ConfigurationError(
            f"[{name}] must be a table", field=name, line=lines.get((name, ""))
        )
    try:
        return model(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else ""
        field = f"{name}.{key}" if key else name
        line = lines.get((name, key)) or lines.get((name, ""))
        if error["type"] == "extra_forbidden":
            raise ConfigurationError(
                f"unknown key '{field}'",
                field=field,
                line=line,
                suggestion=_suggest(key, model.model_fields),
            ) from exc
        raise ConfigurationError(f"invalid {field}: {error['msg']}", field=field, line=line) from exc


def _build_vtc(preset: Preset, section: VtcSection, t_fs: float) -> VtcConfig:
    base = VtcConfig.linear(t_fs) if preset is Preset.IDEAL else VtcConfig.nominal()
    overrides = section.model_dump(exclude_none=True)
    try:
        return VtcConfig(**{**base.model_dump(), **overrides})
    except ValidationError as exc:
        error = exc.errors()[0]
        field = f"vtc.{error['loc'][0]}" if error["loc"] else "vtc"
        raise ConfigurationError(f"invalid {field}: {error['msg']}", field=field) from exc


def _build_tdc(preset: Preset, section: TdcSection) -> TdcConfig:
    t_fs = section.t_fs or 100_000.0
    base = TdcConfig.ideal(t_fs) if preset is Preset.IDEAL else TdcConfig.nominal(t_fs)
    reference = base.stage(2)

    ddu = DduSetting(
        step_rise=section.step_rise or reference.ddu.step_rise,
        step_fall=section.step_fall or reference.ddu.step_fall,
        couple_rf=reference.ddu.couple_rf if section.couple_rf is None else section.couple_rf,
        couple_fr=reference.ddu.couple_fr if section.couple_fr is None else section.couple_fr,
    )
    conv_steps = {
        "conv_step_rise": reference.conv_step_rise
        if section.conv_step_rise is None
        else section.conv_step_rise,
        "conv_step_fall": reference.conv_step_fall
        if section.conv_step_fall is None
        else section.conv_step_fall,
    }
    stages = []
    for k in range(1, N_STAGES + 1):
        stage = StageConfig.nominal(k, t_fs, ddu=ddu, **conv_steps)
        position = k - 1
        try:
            stage = stage.with_codes(
                code_rise=section.code_rise[position] if section.code_rise else None,
                code_fall=section.code_fall[position] if section.code_fall else None,
                conv_code=section.conv_code[position] if section.conv_code else None,
            )
        except ConfigurationError as exc:
            raise ConfigurationError(f"stage {k}: {exc}", field=f"tdc.{exc.field}") from exc
        stages.append(stage)

    scalars = {
        name: getattr(section, name)
        for name in ("jitter_sigma", "meta_window", "meta_resolver", "meta_latency_bound")
        if getattr(section, name) is not None
    }
    tdc = base.model_copy(update={"stages": tuple(stages), **scalars})
    try:
        return tdc.with_mismatch(rise=section.mismatch_rise, fall=section.mismatch_fall)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), field=f"tdc.{exc.field}") from exc


def _build_adc(
    preset: Preset, adc: AdcSection, timing: TimingSection, vtc: VtcSection, tdc: TdcSection
) -> AdcConfig:
    if adc.f_s is not None and timing.t_s is not None:
        raise ConfigurationError(
            "set either adc.f_s or timing.t_s, not both", field="timing.t_s"
        )
    tdc_config = _build_tdc(preset, tdc)
    fields: dict[str, Any] = {
        "vtc": _build_vtc(preset, vtc, tdc_config.t_fs),
        "tdc": tdc_config,
    }
    if adc.f_s is not None:
        fields["f_s"] = adc.f_s
    if timing.t_s is not None:
        fields["f_s"] = FS_PER_SECOND / timing.t_s
    if adc.n_samples is not None:
        fields["n_samples"] = adc.n_samples
    fields.update(timing.model_dump(exclude_none=True, exclude={"t_s"}))
    try:
        return AdcConfig(**fields)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = f"timing.{error['loc'][0]}" if error["loc"] else "timing"
        raise ConfigurationError(f"invalid {field}: {error['msg']}", field=field) from exc


def _validate_command(spec: ExperimentSpec) -> None:
    """Command-specific checks that must pass before any simulation starts."""
    command = spec.command
    n = spec.adc.n_samples
    if command is Command.SIMULATE:
        if spec.stimulus.kind is SignalKind.SINE and (n & (n - 1)) != 0:
            raise ConfigurationError(
                f"adc.n_samples {n} must be a power of two for the spectral test",
                field="adc.n_samples",
            )
        signal_diffs(spec.stimulus, spec.adc.f_s, n)
    elif command is Command.CALIBRATE:
        needed = required_ramp_points(N_STAGES)
        if spec.calib.ramp_points < needed:
            raise ConfigurationError(
                f"calib.ramp_points must be at least {needed}", field="calib.ramp_points"
            )
    elif command in (Command.SWEEP_DT, Command.SWEEP_FREQ):
        n_fft = spec.sweep.n_fft or n
        if (n_fft & (n_fft - 1)) != 0:
            raise ConfigurationError(
                f"FFT length {n_fft} must be a power of two", field="sweep.n_fft"
            )
        if spec.trials < 10:
            raise ConfigurationError(
                f"experiment.trials must be at least 10, got {spec.trials}",
                field="experiment.trials",
            )
        bins = spec.sweep.signal_bins if command is Command.SWEEP_FREQ else [spec.stimulus.signal_bin]
        for signal_bin in bins:
            tone = spec.stimulus.model_copy(update={"kind": SignalKind.SINE, "signal_bin": signal_bin})
            signal_diffs(tone, spec.adc.f_s, n_fft)


def parse_spec(
    text: str, source: Optional[str] = None, overlay: Optional[str] = None
) -> ExperimentSpec:
    """
    Parse and validate spec text.

    Args:
        text: TOML document
        source: File name recorded for provenance
        overlay: Optional TOML document whose keys replace those of ``text``
            section by section (e.g. a calibration ``.overlay.toml``)

    Returns:
        Fully resolved ExperimentSpec

    Raises:
        ConfigurationError: On TOML syntax errors, unknown sections or
            keys, invalid values and command-specific violations
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _TOML_LINE_RE.search(str(exc))
        raise ConfigurationError(
            f"cannot parse spec: {exc}", line=int(match.group(1)) if match else None
        ) from exc

    lines = _key_lines(text)
    for name, values in document.items():
        if name not in SECTIONS:
            raise ConfigurationError(
                f"unknown section [{name}]",
                field=name,
                line=lines.get((name, "")),
                suggestion=_suggest(name, SECTIONS),
            )
    if overlay is not None:
        _apply_overlay(document, overlay, lines)
    if "experiment" not in document:
        raise ConfigurationError("missing [experiment] section", field="experiment")

    sections = {name: _parse_section(name, document.get(name, {}), lines) for name in SECTIONS}
    experiment: ExperimentSection = sections["experiment"]
    preset = sections["adc"].preset
    adc = _build_adc(preset, sections["adc"], sections["timing"], sections["vtc"], sections["tdc"])

    settings = get_settings()
    output_format = experiment.output_format or DEFAULT_FORMATS[experiment.command]
    output_path = experiment.output_path or f"{experiment.command.value}.{output_format.value}"
    stimulus_section: StimulusSection = sections["stimulus"]

    warnings = []
    if not adc.feasible():
        budget = adc.timing_budget()
        required = 0.5 * budget.t_fs + effective_pulse_width(budget, adc.reset_free)
        warnings.append(
            f"timing infeasible: t_s = {budget.t_s:.1f} fs is below the quantization period "
            f"t_fs/2 + t_m{' - t_reset' if adc.reset_free else ''} = {required:.1f} fs"
        )
        logger.warning(warnings[-1])

    try:
        spec = ExperimentSpec(
            command=experiment.command,
            seed=settings.default_seed if experiment.seed is None else experiment.seed,
            trials=experiment.trials,
            output_path=settings.resolve_output(output_path),
            output_format=output_format,
            window=experiment.window,
            preset=preset,
            adc=adc,
            stimulus=SignalSpec(**stimulus_section.model_dump()),
            calib=CalibSpec(**sections["calib"].model_dump()),
            sweep=sections["sweep"],
            power=sections["power"],
            warnings=tuple(warnings),
            source=source,
        )
    except ValidationError as exc:
        raise ConfigurationError(f"invalid spec: {exc.errors()[0]['msg']}") from exc
    _validate_command(spec)
    return spec


def _read(path: Path, what: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"cannot read {what} file {path}: {exc}", field=what) from exc


def load_spec(path: str | Path, overlay: Optional[str | Path] = None) -> ExperimentSpec:
    """
    Load an experiment spec file.

    Args:
        path: TOML spec file
        overlay: Optional TOML file merged over the spec, such as the
            ``.overlay.toml`` written by ``calibrate``

    Returns:
        Fully resolved ExperimentSpec with feasibility warnings attached

    Raises:
        ConfigurationError: If a file is missing, unreadable or invalid
    """
    path = Path(path)
    text = _read(path, "spec")
    if overlay is None:
        spec = parse_spec(text, source=path.name)
    else:
        overlay = Path(overlay)
        spec = parse_spec(text, source=path.name, overlay=_read(overlay, "overlay"))
        spec = spec.model_copy(update={"overlay": overlay.name})
        logger.info(f"Applied overlay {overlay} to {path}")
    logger.info(f"Loaded {spec.command.value} spec from {path}")
    return spec
