"""
Tests for process settings.
"""

from pathlib import Path

import pytest
from pydantic import ValidationError

from src.config import Settings, get_settings


class TestSettings:
    """Test environment-driven configuration."""

    def test_defaults(self):
        settings = Settings()
        assert settings.log_level == "INFO"
        assert settings.workers == 1
        assert settings.default_seed == 0
        assert settings.output_dir == Path("results")
        assert settings.float_format == ".6f"

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("TDADC_WORKERS", "4")
        monkeypatch.setenv("TDADC_LOG_LEVEL", "DEBUG")
        settings = Settings()
        assert settings.workers == 4
        assert settings.log_level == "DEBUG"

    def test_dotenv_file(self, tmp_path):
        (tmp_path / ".env").write_text("TDADC_DEFAULT_SEED=123\n", encoding="utf-8")
        assert Settings().default_seed == 123

    @pytest.mark.parametrize("name,value", [("TDADC_WORKERS", "0"), ("TDADC_LOG_LEVEL", "LOUD")])
    def test_invalid_values(self, monkeypatch, name, value):
        monkeypatch.setenv(name, value)
        with pytest.raises(ValidationError):
            Settings()

    def test_resolve_output(self):
        settings = Settings(output_dir=Path("out"))
        assert settings.resolve_output("codes.csv") == Path("out/codes.csv")
        assert settings.resolve_output("runs/codes.csv") == Path("runs/codes.csv")
        assert settings.resolve_output(Path("/tmp/codes.csv")) == Path("/tmp/codes.csv")

    def test_cached(self):
        assert get_settings() is get_settings()
