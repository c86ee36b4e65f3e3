"""
Process settings management using Pydantic Settings.

Loads simulator-wide options from ``TDADC_*`` environment variables or a
``.env`` file. Experiment parameters live in spec files, not here.
"""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator configuration loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="TDADC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # =========================================================================
    # Logging
    # =========================================================================
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Logging level"
    )

    # =========================================================================
    # Execution
    # =========================================================================
    workers: int = Field(default=1, ge=1, description="Worker processes for Monte Carlo trials")
    default_seed: int = Field(
        default=0, ge=0, description="Seed used when neither the spec nor the CLI sets one"
    )

    # =========================================================================
    # Artifacts
    # =========================================================================
    output_dir: Path = Field(
        default=Path("results"), description="Directory for artifacts given as bare file names"
    )
    float_format: str = Field(default=".6f", description="Format spec for CSV floats")

    def resolve_output(self, path: str | Path) -> Path:
        """Place bare file names under output_dir; keep explicit paths."""
        path = Path(path)
        if path.parent == Path("."):
            return self.output_dir / path
        return path


@lru_cache
def get_settings() -> Settings:
    """
    Get cached simulator settings.

    Returns:
        Settings: Process configuration instance
    """
    return Settings()
