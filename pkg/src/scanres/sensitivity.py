"""Phase-noise spectral analysis and capacitance sensitivity figures.

The chain is: phase time series -> amplitude spectral density S_phi
(Welch, Hann window, one-sided, per-segment linear detrend) -> frequency
noise via the resonance phase slope -> capacitance noise via the
calibration factor alpha.  Amplitude (not power) spectral densities are
the exported unit throughout, so white noise of per-sample sigma at rate
fs appears as the flat level sigma*sqrt(2/fs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .fitting import phase_slope_at_resonance
from .response import ResonatorParams


@dataclass(frozen=True)
class PhaseTimeSeries:
    sample_rate: float        # Hz
    samples: np.ndarray       # rad, measured at the probe tone

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 64:
            raise ValueError("need a 1-D series of at least 64 samples")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class NoiseSpectrum:
    freqs: np.ndarray         # Hz, nonnegative ascending
    asd: np.ndarray           # amplitude spectral density, unit/sqrt(Hz)
    channel: str = "phase_rad"

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        asd = np.asarray(self.asd, dtype=float)
        if freqs.shape != asd.shape or freqs.ndim != 1:
            raise ValueError("freqs and asd must be 1-D arrays of equal length")
        if np.any(freqs < 0) or np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be nonnegative and ascending")
        if np.any(asd < 0):
            raise ValueError("asd must be nonnegative")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "asd", asd)


def phase_psd(series: PhaseTimeSeries, segment_len: int = 256, overlap: float = 0.5) -> NoiseSpectrum:
    """Welch-averaged one-sided amplitude spectral density of the phase.

    segment_len must be a power of two no longer than the series; slow
    drifts are removed by a per-segment linear detrend.
    """
    n = series.samples.size
    if segment_len > n:
        raise ValueError("segment_len exceeds series length")
    if segment_len < 2 or segment_len & (segment_len - 1):
        raise ValueError("segment_len must be a power of two")
    if not 0.0 <= overlap <= 0.9:
        raise ValueError("overlap must be in [0, 0.9]")
    freqs, psd = signal.welch(
        series.samples,
        fs=series.sample_rate,
        window="hann",
        nperseg=segment_len,
        noverlap=int(overlap * segment_len),
        detrend="linear",
        scaling="density",
    )
    return NoiseSpectrum(freqs, np.sqrt(psd), channel="phase_rad")


def frequency_noise(s_phi: NoiseSpectrum, slope: float) -> NoiseSpectrum:
    """Convert phase ASD to frequency ASD: delta_f = S_phi / |dphi/df|."""
    if slope == 0:
        raise ValueError("phase slope must be nonzero")
    return NoiseSpectrum(s_phi.freqs, s_phi.asd / abs(slope), channel="freq_hz")


def capacitance_noise(delta_f: NoiseSpectrum, alpha_cal: float) -> NoiseSpectrum:
    """Convert frequency ASD to capacitance ASD: delta_C = alpha * delta_f."""
    if not alpha_cal > 0:
        raise ValueError("alpha_cal must be positive")
    return NoiseSpectrum(delta_f.freqs, alpha_cal * delta_f.asd, channel="cap_f")


def capacitance_noise_chain(
    series: PhaseTimeSeries,
    params: ResonatorParams,
    alpha_cal: float,
    segment_len: int = 256,
    overlap: float = 0.5,
) -> NoiseSpectrum:
    """phase_psd -> frequency_noise -> capacitance_noise in one call."""
    slope = phase_slope_at_resonance(params)
    return capacitance_noise(frequency_noise(phase_psd(series, segment_len, overlap), slope), alpha_cal)


def sensitivity_vs_bandwidth(
    series: PhaseTimeSeries,
    params: ResonatorParams,
    alpha_cal: float,
    bands,
    segment_len: int = 256,
    overlap: float = 0.5,
) -> list:
    """rms capacitance noise integrated from the lowest nonzero bin up to
    each bandwidth; returns [(bandwidth_hz, delta_c_rms_farad), ...]."""
    bands = [float(b) for b in bands]
    if not bands:
        return []
    nyquist = series.sample_rate / 2.0
    # a band narrower than the bin spacing cannot be integrated
    f_min = max(1.0 / series.duration, series.sample_rate / segment_len)
    for b in bands:
        if b < f_min or b > nyquist:
            raise ValueError(
                f"bandwidth {b} Hz outside the resolvable range [{f_min:.3g}, {nyquist:.3g}] Hz"
            )
    spec = capacitance_noise_chain(series, params, alpha_cal, segment_len, overlap)
    df = spec.freqs[1] - spec.freqs[0]
    power = spec.asd**2
    out = []
    for b in bands:
        sel = (spec.freqs > 0) & (spec.freqs <= b)
        out.append((b, math.sqrt(float(power[sel].sum() * df))))
    return out
