"""
Script to regenerate every measurement artifact from the bundled specs.

Runs each spec file under specs/ through the harness and writes the
artifacts into one output directory, printing the metric summaries.

Usage:
    python scripts/reproduce_figures.py [--out-dir results] [--only simulate]
"""

import argparse
import logging
import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import get_settings
from src.core import SimulatorError
from src.harness import configure_logging, load_spec, run

logger = logging.getLogger(__name__)

SPEC_DIR = Path(__file__).parent.parent / "specs"


def main() -> int:
    """Run all bundled experiments."""
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--out-dir", type=Path, default=Path("results"))
    parser.add_argument("--only", default=None, help="Run only specs for this command")
    args = parser.parse_args()

    settings = get_settings()
    configure_logging(settings.log_level)

    failures = 0
    for spec_path in sorted(SPEC_DIR.glob("*.toml")):
        try:
            spec = load_spec(spec_path)
            if args.only and spec.command.value != args.only:
                continue
            spec = spec.with_overrides(output_path=args.out_dir / spec.output_path.name)
            result = run(spec, settings)
        except SimulatorError as e:
            logger.error(f"{spec_path.name} failed: {e}")
            failures += 1
            continue

        logger.info("=" * 50)
        logger.info(f"{spec_path.name} ({spec.command.value})")
        for line in result.summary_lines(settings.float_format):
            logger.info(f"  {line}")

    logger.info("-" * 50)
    logger.info(f"Completed with {failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
