"""
Dual-Edge Time-Domain ADC Simulator

Command-line entry point: ``python app.py <command> --spec FILE``.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.config import get_settings
from src.core import ExitCode, SimulatorError
from src.harness import Command, configure_logging, load_spec, run

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdadc",
        description="Behavioral simulator of a dual-edge time-domain ADC.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--spec", required=True, type=Path, help="Experiment spec (TOML)")
    parser.add_argument("--seed", type=int, default=None, help="Override experiment.seed")
    parser.add_argument("--out", type=Path, default=None, help="Override experiment.output_path")
    parser.add_argument(
        "--overlay", type=Path, default=None, help="TOML merged over the spec (calibrated codes)"
    )
    return parser


def _report_error(error: dict, code: ExitCode) -> int:
    print(json.dumps({"error": error}, sort_keys=True), file=sys.stderr)
    return int(code)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one experiment and return the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(ExitCode.OK) if exc.code == 0 else int(ExitCode.USAGE)

    settings = get_settings()
    configure_logging(settings.log_level)

    try:
        spec = load_spec(args.spec, overlay=args.overlay)
        if spec.command.value != args.command:
            return _report_error(
                {
                    "type": "UsageError",
                    "message": f"command '{args.command}' does not match "
                    f"experiment.command '{spec.command.value}' in {args.spec}",
                    "exit_code": int(ExitCode.USAGE),
                },
                ExitCode.USAGE,
            )
        spec = spec.with_overrides(seed=args.seed, output_path=args.out)
        result = run(spec, settings)
    except SimulatorError as exc:
        return _report_error(exc.to_dict(), exc.exit_code)
    except Exception as exc:
        logger.error(f"Unexpected failure: {exc}", exc_info=True)
        return _report_error(
            {"type": type(exc).__name__, "message": str(exc), "exit_code": int(ExitCode.INTERNAL)},
            ExitCode.INTERNAL,
        )

    for line in result.summary_lines(settings.float_format):
        print(line)
    return int(result.exit_code)


if __name__ == "__main__":
    sys.exit(main())
