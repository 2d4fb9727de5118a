"""Entropy quantification: covariance estimate, min-entropy, Holevo bound.

The extractable-randomness accounting works in two unit systems:

* plain V^2 for everything measured at the detectors, and
* shot-noise units (SNU) for the covariance matrix entering the Holevo
  bound. Normalization divides the *raw* measured variance of a channel by
  a calibrated vacuum reference for that channel (by default the
  classical-and-quantizer-subtracted quadrature variance of the same
  capture). Excess classical noise then shows up as lambda > 1 and is
  charged to the eavesdropper.

Per-sample quantities:

    H_min  = -log2( erf( delta / (2 sqrt(2 sigma_x^2)) ) )
    S      = ((l+1)/2) log2((l+1)/2) - ((l-1)/2) log2((l-1)/2),
             l = sqrt(sx * sp - c^2) in SNU, S(1) = 0
    rate   = max(H_min - S, 0),  extraction_ratio = rate / adc_bits
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CalibrationError
from .noise_model import AdcSpec, quadrature_variance_from_raw
from .source_sim import SampleBlock

# lambda may dip below 1 by at most this much before it is an error
LAMBDA_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CovarianceEstimate:
    """Sample covariance of the two quadratures, in V^2 and in SNU.

    ``var_*_v2`` are quadrature (classical- and quantizer-subtracted)
    variances; ``raw_var_*_v2`` are the plain sample variances of the
    reconstructed voltages; ``var_*_snu`` are raw variances divided by the
    per-channel vacuum references.
    """

    var_x_v2: float
    var_p_v2: float
    covar_v2: float
    var_x_snu: float
    var_p_snu: float
    covar_snu: float
    raw_var_x_v2: float
    raw_var_p_v2: float
    sample_count: int
    snu_reference_x: float
    snu_reference_p: float

    def __post_init__(self):
        if self.var_x_v2 <= 0 or self.var_p_v2 <= 0:
            raise CalibrationError("quadrature variances must be positive")
        det = self.var_x_snu * self.var_p_snu - self.covar_snu**2
        if det < 0:
            raise CalibrationError("covariance matrix has negative determinant")


@dataclass(frozen=True)
class EntropyReport:
    """Per-sample entropy budget and the resulting extraction ratio."""

    h_min: float
    s_holevo: float
    lam: float
    rate: float
    extraction_ratio: float
    adc_bits: int

    def __post_init__(self):
        if not (0.0 <= self.extraction_ratio <= 1.0):
            raise ValueError("extraction_ratio must be within [0, 1]")


def estimate_covariance(
    block: SampleBlock,
    classical_var_x: float,
    classical_var_p: float,
    snu_reference_x: float | None = None,
    snu_reference_p: float | None = None,
) -> CovarianceEstimate:
    """Unbiased sample covariance of a block, with unit conversions.

    Subtracts the classical and quantizer contributions to obtain the
    quadrature variances (raising CalibrationError if that goes negative,
    or if the block carries no signal at all). When no explicit SNU
    references are given, the derived quadrature variances of this capture
    are used, which is the self-calibrated default.
    """
    n = block.count
    if n < 2:
        raise ValueError("need at least 2 samples for a covariance estimate")
    vx = block.volts_x()
    vp = block.volts_p()
    mx = vx.mean()
    mp_ = vp.mean()
    dx = vx - mx
    dp = vp - mp_
    raw_x = float(dx @ dx) / (n - 1)
    raw_p = float(dp @ dp) / (n - 1)
    cov = float(dx @ dp) / (n - 1)
    if raw_x == 0.0 or raw_p == 0.0:
        raise CalibrationError("constant block: no quantum signal to estimate")
    qx = quadrature_variance_from_raw(raw_x, classical_var_x, block.adc)
    qp = quadrature_variance_from_raw(raw_p, classical_var_p, block.adc)
    if qx <= 0 or qp <= 0:
        raise CalibrationError("no quantum signal after noise subtraction")
    ref_x = qx if snu_reference_x is None else snu_reference_x
    ref_p = qp if snu_reference_p is None else snu_reference_p
    sx = snu_normalize(qx, raw_x, ref_x)
    sp_ = snu_normalize(qp, raw_p, ref_p)
    c_snu = cov / math.sqrt(ref_x * ref_p)
    return CovarianceEstimate(
        var_x_v2=qx, var_p_v2=qp, covar_v2=cov,
        var_x_snu=sx, var_p_snu=sp_, covar_snu=c_snu,
        raw_var_x_v2=raw_x, raw_var_p_v2=raw_p,
        sample_count=n, snu_reference_x=ref_x, snu_reference_p=ref_p,
    )


def snu_normalize(quadrature_var: float, raw_var: float, reference: float) -> float:
    """Shot-noise-unit value of a channel: raw variance over vacuum reference.

    ``quadrature_var`` is carried for interface symmetry with the estimate
    it was derived from and is only sanity-checked; the normalization that
    the security analysis uses is raw_var / reference.
    """
    if not (reference > 0 and math.isfinite(reference)):
        raise ValueError(f"vacuum reference must be positive, got {reference}")
    if quadrature_var < 0:
        raise ValueError("quadrature_var must be >= 0")
    if raw_var < 0:
        raise ValueError("raw_var must be >= 0")
    return raw_var / reference


def min_entropy_bits(var_x: float, adc: AdcSpec) -> float:
    """Min-entropy per sample of the quantized zero-mean Gaussian.

    The most likely ADC outcome of a mid-tread quantizer on a zero-mean
    Gaussian is the central bin, whose probability is
    erf(delta / (2 sqrt(2 var_x))); the result is its -log2 in bits.
    """
    if not (var_x > 0 and math.isfinite(var_x)):
        raise ValueError(f"var_x must be positive, got {var_x}")
    d = adc.step_volts
    if d <= 0:
        raise ValueError("quantization step must be positive")
    p_central = math.erf(d / (2.0 * math.sqrt(2.0 * var_x)))
    return max(-math.log2(p_central), 0.0)


def holevo_from_lambda(lam: float) -> float:
    """Holevo entropy in bits as a function of the symplectic eigenvalue."""
    if lam < 1.0 - LAMBDA_TOLERANCE:
        raise CalibrationError(
            f"symplectic eigenvalue {lam} < 1: unphysical state, check the "
            "shot-noise calibration"
        )
    lam = max(lam, 1.0)
    a = (lam + 1.0) / 2.0
    b = (lam - 1.0) / 2.0
    s = a * math.log2(a)
    if b > 0.0:
        s -= b * math.log2(b)  # b log2 b -> 0 as b -> 0
    return s


def holevo_entropy(cov: CovarianceEstimate, include_covar: bool = False) -> tuple[float, float]:
    """(lambda, S) from a covariance estimate in shot-noise units.

    By default the cross covariance is dropped (c = 0), which upper-bounds
    S; pass ``include_covar=True`` to use the measured c.
    """
    c = cov.covar_snu if include_covar else 0.0
    det = cov.var_x_snu * cov.var_p_snu - c * c
    if det < 0:
        raise CalibrationError("covariance matrix has negative determinant")
    lam = math.sqrt(det)
    return lam, holevo_from_lambda(lam)


def extractable_rate(h_min: float, s: float, adc_bits: int, lam: float = float("nan")) -> EntropyReport:
    """Bits per sample available to the extractor, and the raw-bit ratio."""
    if h_min < 0 or s < 0:
        raise ValueError("entropies must be >= 0")
    if adc_bits < 1:
        raise ValueError("adc_bits must be >= 1")
    rate = max(h_min - s, 0.0)
    return EntropyReport(
        h_min=h_min,
        s_holevo=s,
        lam=lam,
        rate=rate,
        extraction_ratio=min(rate / adc_bits, 1.0),
        adc_bits=adc_bits,
    )


def analyze_block(
    block: SampleBlock,
    classical_var_x: float,
    classical_var_p: float,
    snu_reference_x: float | None = None,
    snu_reference_p: float | None = None,
) -> tuple[CovarianceEstimate, EntropyReport]:
    """Full chain: covariance -> min-entropy -> Holevo bound -> rate."""
    cov = estimate_covariance(
        block, classical_var_x, classical_var_p, snu_reference_x, snu_reference_p
    )
    h = min_entropy_bits(cov.var_x_v2, block.adc)
    lam, s = holevo_entropy(cov)
    return cov, extractable_rate(h, s, block.adc.bits, lam=lam)


REPORT_KEYS = (
    "var_x_v2", "var_p_v2", "covar_v2", "var_x_snu", "var_p_snu",
    "lambda", "h_min_bits", "s_holevo_bits", "rate_bits",
    "extraction_ratio", "sample_count",
)


def render_entropy_report(cov: CovarianceEstimate, rep: EntropyReport) -> str:
    """Serialize the analysis as the fixed ordered key=value block."""
    values = {
        "var_x_v2": cov.var_x_v2,
        "var_p_v2": cov.var_p_v2,
        "covar_v2": cov.covar_v2,
        "var_x_snu": cov.var_x_snu,
        "var_p_snu": cov.var_p_snu,
        "lambda": rep.lam,
        "h_min_bits": rep.h_min,
        "s_holevo_bits": rep.s_holevo,
        "rate_bits": rep.rate,
        "extraction_ratio": rep.extraction_ratio,
        "sample_count": cov.sample_count,
    }
    return "".join(f"{k}={values[k]!r}\n" for k in REPORT_KEYS)
