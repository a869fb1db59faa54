"""Forward model of the reflected resonator response.

The one-port reflection of the sensor is

    S11(f) = B exp(i tau f) * (1 - 2 (Q/Qc) e^{i theta} / (1 + 2 i Q (f-f0)/f0)),

with 1/Q = 1/Qi + cos(theta)/Qc.  The cable phase is exp(i*tau*f) with the
frequency itself in the exponent; any reference-frequency convention is a
reparameterization absorbed by the environment phase at fit time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantities import CONSTANTS


@dataclass(frozen=True)
class ResonatorParams:
    """Parameters of the reflection model.

    f0 in Hz, Qi/Qc dimensionless, theta in rad (impedance-mismatch
    asymmetry), B_mag/B_phase the complex environment amplitude, tau the
    electrical delay in s.
    """

    f0: float
    Qi: float
    Qc: float
    theta: float = 0.0
    B_mag: float = 1.0
    B_phase: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not (self.f0 > 0 and self.Qi > 0 and self.Qc > 0):
            raise ValueError("f0, Qi and Qc must all be positive")
        if not abs(self.theta) < math.pi / 2:
            raise ValueError(f"|theta| must be < pi/2, got {self.theta}")
        if not self.B_mag > 0:
            raise ValueError("B_mag must be positive")
        q = 1.0 / self.Qi + math.cos(self.theta) / self.Qc
        if not (q > 0 and math.isfinite(q)):
            raise ValueError("total Q is not positive/finite for these parameters")

    @property
    def total_q(self) -> float:
        return total_q(self)

    @property
    def linewidth(self) -> float:
        """Loaded full linewidth f0/Q in Hz."""
        return self.f0 / self.total_q


def total_q(params: ResonatorParams) -> float:
    """Total quality factor 1/Q = 1/Qi + cos(theta)/Qc."""
    q = 1.0 / (1.0 / params.Qi + math.cos(params.theta) / params.Qc)
    if not (q > 0 and math.isfinite(q)):
        raise ValueError("total Q must be positive and finite")
    return q


def s11_model(params: ResonatorParams, f):
    """Evaluate the complex reflection model at frequency f (Hz, scalar or array)."""
    f = np.asarray(f, dtype=float)
    q = total_q(params)
    x = (f - params.f0) / params.f0
    env = params.B_mag * np.exp(1j * params.B_phase) * np.exp(1j * params.tau * f)
    return env * (1.0 - 2.0 * (q / params.Qc) * np.exp(1j * params.theta) / (1.0 + 2j * q * x))


def average_photon_number(Q: float, Qc: float, f0: float, p_in_watts: float) -> float:
    """Average photon number n = 2 Q^2 P_in / (pi Qc h f0^2) at drive power P_in (W)."""
    if not (Q > 0 and Qc > 0 and f0 > 0 and p_in_watts > 0):
        raise ValueError("Q, Qc, f0 and P_in must all be positive")
    return 2.0 * Q * Q * p_in_watts / (math.pi * Qc * CONSTANTS.h * f0 * f0)


@dataclass(frozen=True)
class ComplexTrace:
    """A frequency sweep with complex reflection samples."""

    freqs: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        samples = np.asarray(self.samples, dtype=complex)
        if freqs.ndim != 1 or samples.ndim != 1 or freqs.size != samples.size:
            raise ValueError("freqs and samples must be 1-D arrays of equal length")
        if freqs.size < 8:
            raise ValueError(f"trace needs at least 8 points, got {freqs.size}")
        if not np.all(np.diff(freqs) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.freqs.size)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive complex-Gaussian noise: per-quadrature sigma and RNG seed."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def synthesize_trace(params: ResonatorParams, freqs, noise: NoiseSpec = NoiseSpec()) -> ComplexTrace:
    """Evaluate the model on a grid and add i.i.d. complex Gaussian noise.

    Deterministic for a fixed seed: the real parts of the noise are drawn
    first, then the imaginary parts, from a PCG64 stream.
    """
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0:
        raise ValueError("frequency grid is empty")
    samples = s11_model(params, freqs)
    if noise.sigma > 0:
        rng = np.random.default_rng(noise.seed)
        samples = samples + noise.sigma * (
            rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
        )
    return ComplexTrace(freqs, samples)


def linear_grid(params: ResonatorParams, n_points: int = 401, n_linewidths: float = 30.0) -> np.ndarray:
    """Symmetric frequency grid around f0 spanning the given number of linewidths."""
    if n_points < 8:
        raise ValueError("need at least 8 points")
    half = 0.5 * n_linewidths * params.linewidth
    return np.linspace(params.f0 - half, params.f0 + half, n_points)
