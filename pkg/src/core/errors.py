"""
Exception hierarchy shared by every simulator module.

Each error carries the process exit code the harness maps it to, so the
CLI can turn any failure into a named exit status and a JSON error record.
"""

from enum import IntEnum
from typing import Any, Optional


class ExitCode(IntEnum):
    """Process exit statuses of the command-line harness."""
    OK = 0
    USAGE = 2
    CONFIGURATION = 3
    INPUT = 4
    RANGE = 5
    STATISTICS = 6
    ARTIFACT = 7
    INTERNAL = 70


class SimulatorError(Exception):
    """Base class for all simulator errors."""

    exit_code: ExitCode = ExitCode.INTERNAL

    def to_dict(self) -> dict[str, Any]:
        """Convert to the JSON error record emitted by the CLI."""
        return {
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": int(self.exit_code),
        }


class ConfigurationError(SimulatorError):
    """Invalid parameters or an unreadable experiment spec."""

    exit_code = ExitCode.CONFIGURATION

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        suggestion: Optional[str] = None,
    ):
        self.field = field
        self.line = line
        self.suggestion = suggestion
        parts = [message]
        if line is not None:
            parts.append(f"(line {line})")
        if suggestion:
            parts.append(f"did you mean '{suggestion}'?")
        super().__init__(" ".join(parts))

    def to_dict(self) -> dict[str, Any]:
        record = super().to_dict()
        record.update(field=self.field, line=self.line, suggestion=self.suggestion)
        return record


class InputError(SimulatorError):
    """Malformed input sequence (e.g. broken polarity alternation)."""

    exit_code = ExitCode.INPUT


class RangeExceededError(SimulatorError):
    """
    VTC input outside the full-scale range.

    The clipped conversion result is attached so callers can continue
    with saturated edges if they choose to.
    """

    exit_code = ExitCode.RANGE

    def __init__(self, message: str, clipped: Any = None):
        self.clipped = clipped
        super().__init__(message)


class StatisticsError(SimulatorError):
    """Not enough samples, or a degenerate record, for a statistic."""

    exit_code = ExitCode.STATISTICS


class ArtifactError(SimulatorError):
    """An output artifact could not be written."""

    exit_code = ExitCode.ARTIFACT
