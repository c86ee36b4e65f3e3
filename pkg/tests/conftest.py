"""Shared fixtures for the simulator test suite."""

import os

import hypothesis
import numpy as np
import pytest

from src.adc import AdcConfig, TimeDomainAdc
from src.config import get_settings
from src.core import RngStream
from src.tdc import TdcConfig

hypothesis.settings.register_profile("fast", max_examples=25, deadline=None)
hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

T_FS = 100_000.0
LSB = T_FS / 256


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def ideal_tdc():
    return TdcConfig.ideal(T_FS)


@pytest.fixture
def nominal_tdc():
    return TdcConfig.nominal(T_FS)


@pytest.fixture
def ideal_adc():
    return TimeDomainAdc(AdcConfig.ideal())


@pytest.fixture
def nominal_adc():
    return TimeDomainAdc(AdcConfig.nominal())


@pytest.fixture
def dt_grid():
    """Exhaustive 2^14-point Δt grid across the full scale."""
    return np.linspace(-T_FS / 2, T_FS / 2, 1 << 14, endpoint=False)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep every test away from the developer's environment and .env."""
    for name in (
        "TDADC_LOG_LEVEL",
        "TDADC_WORKERS",
        "TDADC_DEFAULT_SEED",
        "TDADC_OUTPUT_DIR",
        "TDADC_FLOAT_FORMAT",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
