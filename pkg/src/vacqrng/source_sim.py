"""Seeded stochastic stand-in for the optical bench.

Generates dual-channel (X, P) quantized sample streams from a correlated
Gaussian model, reproduces the variance-vs-laser-power response with a hard
saturation knee, and estimates power spectral density.

The default calibration is the reference operating point used throughout
the test suite: raw voltage variances of 5.9394e-4 / 6.3054e-4 V^2 at 9 mW
with classical floors of 0.6037e-4 / 0.5841e-4 V^2 on a 14-bit, +/-1 V ADC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import CalibrationError
from .noise_model import AdcSpec

# Reference operating point (variances in V^2, power in mW).
DEFAULT_SAT_POWER_MW = 9.0
DEFAULT_CLASSICAL_VAR_X = 0.6037e-4
DEFAULT_CLASSICAL_VAR_P = 0.5841e-4
DEFAULT_QUANTUM_VAR_X_AT_SAT = 5.3357e-4
DEFAULT_QUANTUM_VAR_P_AT_SAT = 5.7213e-4
DEFAULT_SLOPE_X = DEFAULT_QUANTUM_VAR_X_AT_SAT / DEFAULT_SAT_POWER_MW
DEFAULT_SLOPE_P = DEFAULT_QUANTUM_VAR_P_AT_SAT / DEFAULT_SAT_POWER_MW
DEFAULT_ADC = AdcSpec(range_volts=1.0, bits=14)

# Samples per generation block in the CLI; one Philox counter stride each.
GEN_BLOCK_SAMPLES = 1 << 20


@dataclass(frozen=True)
class SourceConfig:
    """Full description of the simulated source at one laser power.

    ``slope_x``/``slope_p`` are the linear variance-vs-power gains in
    V^2/mW; the quantum variance saturates hard at ``sat_power_mw``.
    ``xp_covariance`` is the quantum X-P covariance in V^2 at the
    configured power. ``seed`` keys the counter-based generator, so any
    block index is reproducible without generating its predecessors.
    """

    power_mw: float = DEFAULT_SAT_POWER_MW
    slope_x: float = DEFAULT_SLOPE_X
    slope_p: float = DEFAULT_SLOPE_P
    sat_power_mw: float = DEFAULT_SAT_POWER_MW
    classical_var_x: float = DEFAULT_CLASSICAL_VAR_X
    classical_var_p: float = DEFAULT_CLASSICAL_VAR_P
    xp_covariance: float = 0.0
    adc: AdcSpec = field(default_factory=lambda: DEFAULT_ADC)
    seed: int = 0

    def __post_init__(self):
        if not (self.sat_power_mw > 0):
            raise ValueError("sat_power_mw must be positive")
        if self.power_mw < 0:
            raise ValueError("power_mw must be >= 0")
        if self.classical_var_x < 0 or self.classical_var_p < 0:
            raise ValueError("classical variances must be >= 0")
        if self.slope_x < 0 or self.slope_p < 0:
            raise ValueError("variance slopes must be >= 0")
        qx, qp = self.quantum_variances(self.power_mw)
        if abs(self.xp_covariance) > math.sqrt(qx * qp) + 1e-30:
            raise ValueError(
                "xp_covariance makes the quadrature covariance matrix indefinite"
            )
        if not (-(1 << 63) <= int(self.seed) < (1 << 64)):
            raise ValueError("seed must fit in 64 bits")

    def quantum_variances(self, power_mw: float) -> tuple[float, float]:
        """Quantum variance per channel at ``power_mw``: slope * min(p, sat)."""
        p = min(power_mw, self.sat_power_mw)
        return self.slope_x * p, self.slope_p * p


@dataclass
class SampleBlock:
    """A block of simultaneously sampled, quantized (X, P) voltage pairs.

    ``clipped_x``/``clipped_p`` count samples that saturated the ADC during
    generation (zero for blocks read back from disk).
    """

    codes_x: np.ndarray
    codes_p: np.ndarray
    adc: AdcSpec
    count: int
    clipped_x: int = 0
    clipped_p: int = 0

    def __post_init__(self):
        if self.codes_x.shape != (self.count,) or self.codes_p.shape != (self.count,):
            raise ValueError("code arrays must both have shape (count,)")

    def volts_x(self) -> np.ndarray:
        return self.codes_x.astype(np.float64) * self.adc.step_volts

    def volts_p(self) -> np.ndarray:
        return self.codes_p.astype(np.float64) * self.adc.step_volts


def power_response(config: SourceConfig, power_mw: float) -> tuple[float, float]:
    """Modeled raw voltage variance (V^2) per channel at a given laser power.

    Quantum variance grows linearly up to the saturation knee and is flat
    beyond it; the classical floor is always present, so at zero power only
    the classical variance remains.
    """
    if power_mw < 0:
        raise ValueError("power_mw must be >= 0")
    qx, qp = config.quantum_variances(power_mw)
    return qx + config.classical_var_x, qp + config.classical_var_p


def quantize_voltage(v: float, adc: AdcSpec) -> int:
    """Mid-tread quantizer code for one voltage, clamped to the code range.

    Rounding is half-away-from-zero, so the quantizer is symmetric about
    0 V. For in-range voltages |code * delta - v| <= delta / 2.
    """
    d = adc.step_volts
    code = int(math.floor(abs(v) / d + 0.5)) * (1 if v >= 0 else -1)
    return min(max(code, adc.code_min), adc.code_max)


def _quantize_array(v: np.ndarray, adc: AdcSpec) -> tuple[np.ndarray, int]:
    """Vectorized quantize_voltage; returns (int16 codes, clamp count)."""
    d = adc.step_volts
    scaled = v / d
    codes = np.floor(np.abs(scaled) + 0.5) * np.sign(scaled)
    clipped = int(np.count_nonzero((codes < adc.code_min) | (codes > adc.code_max)))
    np.clip(codes, adc.code_min, adc.code_max, out=codes)
    return codes.astype(np.int16), clipped


def simulate_block(config: SourceConfig, count: int, block_index: int = 0) -> SampleBlock:
    """Draw ``count`` correlated (X, P) pairs and quantize them.

    The quantum part is sampled from the 2x2 covariance matrix
    [[qx, c], [c, qp]] via its Cholesky factor; classical noise is added
    independently per channel (it originates in per-detector electronics).
    Output is a pure function of (config.seed, block_index, count): the
    generator is Philox with the block index placed in the high counter
    word, so blocks can be produced in any order or in parallel.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if block_index < 0:
        raise ValueError("block_index must be >= 0")
    rng = np.random.Generator(
        np.random.Philox(key=int(config.seed) & ((1 << 64) - 1), counter=block_index << 128)
    )
    qx, qp = config.quantum_variances(config.power_mw)
    c = config.xp_covariance

    # 2x2 Cholesky with explicit degenerate handling (qx == 0 forces c == 0).
    l00 = math.sqrt(qx)
    l10 = c / l00 if l00 > 0 else 0.0
    l11 = math.sqrt(max(qp - l10 * l10, 0.0))

    z = rng.standard_normal((4, count))
    vx = l00 * z[0]
    vp = l10 * z[0] + l11 * z[1]
    if config.classical_var_x > 0:
        vx = vx + math.sqrt(config.classical_var_x) * z[2]
    if config.classical_var_p > 0:
        vp = vp + math.sqrt(config.classical_var_p) * z[3]

    codes_x, clip_x = _quantize_array(vx, config.adc)
    codes_p, clip_p = _quantize_array(vp, config.adc)
    return SampleBlock(codes_x, codes_p, config.adc, count, clip_x, clip_p)


def estimate_psd(
    block: SampleBlock, segment_len: int, window: str = "hann"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Averaged-periodogram PSD of both channels in V^2 per unit frequency.

    Hann window with 50% segment overlap by default (``window="rect"``
    selects a plain rectangular window, useful for exact Parseval checks).
    The sample rate is normalized to 1, so frequencies run 0..0.5 over
    ``segment_len // 2 + 1`` one-sided bins and
    sum(psd) * (1 / segment_len) recovers the sample variance for white
    input.
    """
    if segment_len < 2 or (segment_len & (segment_len - 1)) != 0:
        raise ValueError(f"segment_len must be a power of two >= 2, got {segment_len}")
    if block.count < segment_len:
        raise CalibrationError(
            f"block has {block.count} samples, fewer than segment_len={segment_len}"
        )
    win = "boxcar" if window in ("rect", "boxcar") else window
    noverlap = segment_len // 2
    freqs, psd_x = signal.welch(
        block.volts_x(), fs=1.0, window=win, nperseg=segment_len,
        noverlap=noverlap, detrend=False, scaling="density",
    )
    _, psd_p = signal.welch(
        block.volts_p(), fs=1.0, window=win, nperseg=segment_len,
        noverlap=noverlap, detrend=False, scaling="density",
    )
    return freqs, psd_x, psd_p
