"""Static noise and quantization arithmetic for a dual-homodyne ADC chain.

The voltage measured on each detector channel is modeled as a zero-mean
Gaussian whose total variance is the sum of a quantum (vacuum fluctuation)
term, a classical electronics term, and a quantizer term:

    sigma_tot^2 = sigma_Q^2 + sigma_E^2 + 2 * (delta / 12)^2

where ``delta = 2 R / 2^n`` is the step of an n-bit ADC spanning [-R, +R].
The quantizer term is carried in this exact form even where it is
numerically negligible (at 14 bits it is ~2e-10 V^2). Note it is not the
textbook uniform-quantizer variance delta^2 / 12; the model keeps the
2*(delta/12)^2 form deliberately.

All variances in this module are plain V^2. Shot-noise-unit normalization
happens in :mod:`vacqrng.entropy` so there is a single normalization point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError

MIN_ADC_BITS = 2
MAX_ADC_BITS = 24


@dataclass(frozen=True)
class AdcSpec:
    """Digitizer geometry: symmetric input range [-R, +R] and bit depth."""

    range_volts: float
    bits: int

    def __post_init__(self):
        if not (self.range_volts > 0 and math.isfinite(self.range_volts)):
            raise ValueError(f"range_volts must be positive, got {self.range_volts}")
        if not (MIN_ADC_BITS <= int(self.bits) <= MAX_ADC_BITS):
            raise ValueError(
                f"bits must be in [{MIN_ADC_BITS}, {MAX_ADC_BITS}], got {self.bits}"
            )

    @property
    def step_volts(self) -> float:
        """Quantization step delta = 2R / 2^n, exact in binary arithmetic."""
        return quantization_step(self.range_volts, self.bits)

    @property
    def code_min(self) -> int:
        return -(1 << (self.bits - 1))

    @property
    def code_max(self) -> int:
        return (1 << (self.bits - 1)) - 1


@dataclass(frozen=True)
class ChannelNoise:
    """Per-channel variance split: quantum sigma_Q^2 and classical sigma_E^2."""

    quantum_var: float
    classical_var: float

    def __post_init__(self):
        for name in ("quantum_var", "classical_var"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


def quantization_step(range_volts: float, bits: int) -> float:
    """Step delta = 2 * range_volts / 2^bits of a symmetric n-bit ADC."""
    if not (range_volts > 0 and math.isfinite(range_volts)):
        raise ValueError(f"range_volts must be positive, got {range_volts}")
    if not (1 <= int(bits) <= MAX_ADC_BITS):
        raise ValueError(f"bits must be in [1, {MAX_ADC_BITS}], got {bits}")
    return 2.0 * range_volts / float(1 << int(bits))


def quantizer_variance_term(adc: AdcSpec) -> float:
    """The 2*(delta/12)^2 contribution the noise model assigns to the ADC."""
    d = adc.step_volts
    return 2.0 * (d / 12.0) ** 2


def total_variance(noise: ChannelNoise, adc: AdcSpec) -> float:
    """Total modeled voltage variance sigma_Q^2 + sigma_E^2 + 2(delta/12)^2."""
    return noise.quantum_var + noise.classical_var + quantizer_variance_term(adc)


def quadrature_variance_from_raw(raw_var: float, classical_var: float, adc: AdcSpec) -> float:
    """Invert :func:`total_variance`: recover sigma_Q^2 from a measured total.

    Raises CalibrationError when the classical plus quantizer contribution
    exceeds the measured total. That means the calibration is wrong (there
    cannot be negative quantum variance) and must be surfaced, not clamped.
    """
    if not (math.isfinite(raw_var) and raw_var >= 0):
        raise ValueError(f"raw_var must be finite and >= 0, got {raw_var}")
    if not (math.isfinite(classical_var) and classical_var >= 0):
        raise ValueError(f"classical_var must be finite and >= 0, got {classical_var}")
    q = raw_var - classical_var - quantizer_variance_term(adc)
    if q < 0:
        raise CalibrationError(
            f"classical+quantizer variance ({classical_var + quantizer_variance_term(adc):g}) "
            f"exceeds measured total ({raw_var:g}); check calibration"
        )
    return q


def qcnr_db(quantum_var: float, classical_var: float) -> float:
    """Quantum-to-classical noise ratio 10*log10(V_Q / V_E) in dB."""
    if not (quantum_var > 0 and math.isfinite(quantum_var)):
        raise ValueError(f"quantum_var must be positive, got {quantum_var}")
    if not (classical_var > 0 and math.isfinite(classical_var)):
        raise ValueError(f"classical_var must be positive, got {classical_var}")
    return 10.0 * math.log10(quantum_var / classical_var)


def gaussian_pdf(v, noise: ChannelNoise, adc: AdcSpec):
    """Density of the modeled detector voltage at ``v`` (accepts arrays).

    P(v) = exp(-v^2 / (2 sigma_tot^2)) / sqrt(2 pi sigma_tot^2) with
    sigma_tot^2 from :func:`total_variance`. Integrates to 1 over the line.
    """
    s2 = total_variance(noise, adc)
    if s2 <= 0:
        raise ValueError("total variance must be positive for a density")
    v = np.asarray(v, dtype=np.float64)
    out = np.exp(-(v * v) / (2.0 * s2)) / math.sqrt(2.0 * math.pi * s2)
    return out if out.ndim else float(out)
