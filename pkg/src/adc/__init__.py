"""End-to-end time-domain ADC pipeline."""

from .model import AdcConfig, TimeDomainAdc

__all__ = ["AdcConfig", "TimeDomainAdc"]
