"""Experiment specs, orchestration and deterministic artifact output."""

from .artifacts import (
    build_provenance,
    canonical_json,
    read_provenance,
    render_csv,
    render_toml,
    write_csv,
    write_json,
    write_toml,
)
from .logging_setup import configure_logging
from .runner import HANDLERS, RunResult, run
from .spec import Command, ExperimentSpec, OutputFormat, Preset, load_spec, parse_spec

__all__ = [
    "build_provenance",
    "canonical_json",
    "read_provenance",
    "render_csv",
    "render_toml",
    "write_csv",
    "write_json",
    "write_toml",
    "configure_logging",
    "HANDLERS",
    "RunResult",
    "run",
    "Command",
    "ExperimentSpec",
    "OutputFormat",
    "Preset",
    "load_spec",
    "parse_spec",
]
