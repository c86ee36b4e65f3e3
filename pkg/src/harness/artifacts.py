"""
Deterministic artifact writers.

JSON is canonical (sorted keys, fixed separators, trailing newline). CSV
and TOML start with one ``# provenance:`` comment line; CSV then has a
header row, floats use a fixed format and rows end with ``\\n``. Nothing
time- or host-dependent is written, so identical runs produce identical
bytes.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import tomli_w
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from src import __version__
from src.core import ArtifactError

logger = logging.getLogger(__name__)

TOOL_NAME = "tdadc"


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return value.as_posix()
    return value


def canonical_json(payload: Any, indent: int | None = 2) -> str:
    separators = (",", ": ") if indent else (",", ":")
    return json.dumps(
        _plain(payload),
        sort_keys=True,
        indent=indent,
        separators=separators,
        ensure_ascii=False,
        allow_nan=False,
    )


def build_provenance(
    command: str, seed: int, echo: dict[str, Any], warnings: Sequence[str] = ()
) -> dict[str, Any]:
    """Self-describing header embedded in every artifact."""
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "seed": seed,
        "spec": echo,
        "warnings": list(warnings),
    }


@retry(
    retry=retry_if_exception_type(OSError),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=1, min=1, max=10),
    reraise=True,
)
def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def write_text(path: str | Path, text: str) -> Path:
    """
    Write an artifact, retrying transient OS errors.

    Raises:
        ArtifactError: If the file still cannot be written
    """
    path = Path(path)
    try:
        _write_text(path, text)
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")
    return path


def write_json(path: str | Path, payload: dict[str, Any], provenance: dict[str, Any]) -> Path:
    document = {**payload, "provenance": provenance}
    return write_text(path, canonical_json(document) + "\n")


def _format_cell(value: Any, float_format: str) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return format(value, float_format) if math.isfinite(value) else "nan"
    return str(value)


def render_csv(
    columns: Sequence[str],
    rows: Iterable[dict[str, Any]],
    provenance: dict[str, Any],
    float_format: str = ".6f",
) -> str:
    buffer = io.StringIO()
    buffer.write(f"# provenance: {canonical_json(provenance, indent=None)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[column], float_format) for column in columns])
    return buffer.getvalue()


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[dict[str, Any]],
    provenance: dict[str, Any],
    float_format: str = ".6f",
) -> Path:
    return write_text(path, render_csv(columns, rows, provenance, float_format))


def render_toml(document: dict[str, Any], provenance: dict[str, Any]) -> str:
    """TOML body behind the same one-line provenance comment as CSV."""
    header = f"# provenance: {canonical_json(provenance, indent=None)}\n"
    return header + tomli_w.dumps(_plain(document))


def write_toml(path: str | Path, document: dict[str, Any], provenance: dict[str, Any]) -> Path:
    return write_text(path, render_toml(document, provenance))


def read_provenance(path: str | Path) -> dict[str, Any]:
    """Parse the provenance comment of a CSV or TOML artifact."""
    first = Path(path).read_text(encoding="utf-8").splitlines()[0]
    prefix = "# provenance: "
    if not first.startswith(prefix):
        raise ArtifactError(f"{path} has no provenance line")
    return json.loads(first[len(prefix):])
