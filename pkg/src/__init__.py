"""
Dual-Edge Time-Domain ADC Simulator

Behavioral, event-driven model of a reset-free time-domain ADC built from
a dual-edge voltage-to-time converter and an 8-bit dual-edge asynchronous
pipelined SAR time-to-digital converter. The package provides:
- Mismatch and jitter Monte Carlo over the quantization pipeline
- Histogram-driven foreground calibration of the per-stage delays
- Spectral (SNDR/SFDR/ENOB) and code-density (DNL/INL) analysis
- A reproducible, spec-file driven experiment harness
"""

__version__ = "1.0.0"
