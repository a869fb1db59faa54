"""Analytic tip-sample capacitance, distance calibration, and scan synthesis.

The FEM electrostatics of the real instrument is replaced by the classical
sphere-over-plane image-charge series

    C(d) = 4 pi eps0 R sinh(beta) sum_n 1/sinh(n beta),  cosh(beta) = 1 + d/R,

scaled by a material response factor (1 for metal, (eps-1)/(eps+1) for a
dielectric) plus a distance-independent stray term.  Capacitance and
frequency shifts are always referenced to the far-retracted tip position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import brentq, minimize_scalar

from .quantities import CONSTANTS
from .response import ResonatorParams, total_q

# calibration reference: tip "more than 100 um away", where the interaction
# is negligible
FAR_REFERENCE_DISTANCE = 100e-6


@dataclass(frozen=True)
class TipModel:
    R: float = 1e-6            # effective tip radius, m
    C_stray: float = 0.0       # distance-independent capacitance, F
    series_terms: int = 20     # image-charge series truncation

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("tip radius must be positive")
        if self.series_terms < 2:
            raise ValueError("series_terms must be >= 2")


@dataclass(frozen=True)
class CalibrationResult:
    d0: float            # tip-sample distance at zero scanner displacement, m
    alpha_cal: float     # capacitance per frequency shift, F/Hz
    residual_rms: float  # rms misfit in F
    converged: bool = True

    def __post_init__(self):
        if not (self.d0 > 0 and self.alpha_cal > 0):
            raise ValueError("d0 and alpha_cal must be positive")


def dielectric_response(eps_r: float) -> float:
    """Image-charge response factor of a dielectric half-space."""
    if eps_r < 1:
        raise ValueError("relative permittivity must be >= 1")
    return (eps_r - 1.0) / (eps_r + 1.0)


def _sphere_plane_series(d, R: float, n_terms: int):
    """Image-charge sum sinh(beta) * sum_{n=1..K} 1/sinh(n*beta) with the
    geometric tail beyond K added in closed form (the truncated terms decay
    as 2 sinh(beta) e^{-n beta})."""
    d = np.asarray(d, dtype=float)
    beta = np.arccosh(1.0 + d / R)
    n = np.arange(1, n_terms + 1).reshape((-1,) + (1,) * d.ndim)
    partial = (np.sinh(beta) / np.sinh(n * beta)).sum(axis=0)
    tail = 2.0 * np.sinh(beta) * np.exp(-(n_terms + 1) * beta) / (1.0 - np.exp(-beta))
    return 4.0 * np.pi * CONSTANTS.eps0 * R * (partial + tail)


def cap_model(d, tip: TipModel, response: float = 1.0):
    """Tip-sample capacitance at distance d (m) over a material of the
    given response factor (in (0, 1]; metal = 1)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if not 0.0 <= response <= 1.0:
        raise ValueError("response factor must be in [0, 1]")
    out = response * _sphere_plane_series(d, tip.R, tip.series_terms) + tip.C_stray
    return float(out) if out.ndim == 0 else out


def delta_cap(d, tip: TipModel, response: float = 1.0):
    """Capacitance shift C(d) - C(far reference); positive and decreasing in d."""
    far = cap_model(FAR_REFERENCE_DISTANCE, tip, response)
    return cap_model(d, tip, response) - far


def coupling_capacitance(d, tip: TipModel):
    """Distance-dependent part of the capacitance only: C_series(d) - C_series(inf).

    Vanishes as d -> inf, which anchors the coupling proxy g(d) and its
    Purcell asymptote.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    iso = 4.0 * np.pi * CONSTANTS.eps0 * tip.R
    out = _sphere_plane_series(d, tip.R, tip.series_terms) - iso
    return float(out) if out.ndim == 0 else out


def calibrate_distance(approach, tip: TipModel) -> CalibrationResult:
    """Fit (d0, alpha_cal) so that alpha*dF0(z) overlays dC_model(-z + d0).

    `approach` is an iterable of (z, delta_f0) pairs with z strictly
    increasing and delta_f0 the *downward* resonance shift (Hz, >= 0)
    relative to the far-retracted reference.  d0 is profiled on a log grid
    and polished by bounded scalar minimization of the shape misfit
    (1 - correlation^2); alpha then follows in closed form.  A raw joint
    least-squares in capacitance units is degenerate under noise (alpha -> 0
    with d0 -> inf), the shape criterion has the same noiseless optimum.
    """
    arr = np.asarray(approach, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("approach data must be (z, delta_f0) pairs")
    z, df = arr[:, 0], arr[:, 1]
    if z.size < 6:
        raise ValueError("need at least 6 approach points")
    if not np.all(np.diff(z) > 0):
        raise ValueError("z values must be strictly increasing")
    if np.any(df < 0):
        raise ValueError("delta_f0 must be the nonnegative downward shift")
    if not np.any(df > 0):
        raise ValueError("approach curve has no frequency shift to fit")

    df2 = float(df @ df)

    def misfit(log_d0: float) -> float:
        d0 = math.exp(log_d0)
        dc = delta_cap(d0 - z, tip)
        dc2 = float(dc @ dc)
        if dc2 == 0.0:
            return 1.0
        rho2 = float(df @ dc) ** 2 / (df2 * dc2)
        return 1.0 - rho2

    lo = math.log(z.max() + 1e-4 * tip.R)
    hi = math.log(FAR_REFERENCE_DISTANCE)
    grid = np.linspace(lo, hi, 120)
    costs = [misfit(g) for g in grid]
    i_best = int(np.argmin(costs))
    bl = grid[max(i_best - 1, 0)]
    bh = grid[min(i_best + 1, grid.size - 1)]
    res = minimize_scalar(misfit, bounds=(bl, bh), method="bounded",
                          options={"xatol": 1e-14})
    d0 = float(math.exp(res.x))

    dc = delta_cap(d0 - z, tip)
    alpha = float(df @ dc) / df2
    converged = bool(res.success) and alpha > 0
    if alpha <= 0:
        raise ValueError("calibration failed: non-positive alpha")
    rms = float(np.sqrt(np.mean((alpha * df - dc) ** 2)))
    return CalibrationResult(d0=d0, alpha_cal=alpha, residual_rms=rms, converged=converged)


def distance_from_shift(delta_f0: float, cal: CalibrationResult, tip: TipModel) -> float:
    """Invert alpha * delta_f0 = dC_model(d); unique by monotonicity."""
    if delta_f0 < 0:
        raise ValueError("delta_f0 must be a nonnegative downward shift")
    if delta_f0 == 0:
        return FAR_REFERENCE_DISTANCE
    target = cal.alpha_cal * delta_f0
    d_min = 1e-9
    if target > delta_cap(d_min, tip):
        raise ValueError("frequency shift outside the calibrated model range")
    return float(brentq(lambda d: delta_cap(d, tip) - target, d_min,
                        FAR_REFERENCE_DISTANCE, xtol=1e-18, rtol=1e-14))


@dataclass(frozen=True)
class MaterialMap:
    """2-D sample composition map: cell value 0 encodes metal, values >= 1
    encode a dielectric with that relative permittivity."""

    grid: np.ndarray
    pitch: float                    # m per pixel
    origin: tuple = (0.0, 0.0)      # m

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("material map must be a non-empty 2-D grid")
        if not self.pitch > 0:
            raise ValueError("pitch must be positive")
        bad = (grid != 0.0) & (grid < 1.0)
        if np.any(bad):
            raise ValueError("cells must be 0 (metal) or eps_r >= 1")
        object.__setattr__(self, "grid", grid)

    def response(self) -> np.ndarray:
        """Per-pixel image-charge response factor."""
        resp = np.ones_like(self.grid)
        diel = self.grid >= 1.0
        eps = self.grid[diel]
        resp[diel] = (eps - 1.0) / (eps + 1.0)
        return resp


@dataclass(frozen=True)
class ScanImage:
    grid: np.ndarray
    pitch: float
    channel: str = "phase_rad"      # or "delta_f0_hz"
    origin: tuple = (0.0, 0.0)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("scan image must be a non-empty 2-D grid")
        if not self.pitch > 0:
            raise ValueError("pitch must be positive")
        object.__setattr__(self, "grid", grid)


def tip_kernel(pitch: float, tip: TipModel, height: float) -> np.ndarray:
    """Radially symmetric raised-cosine kernel, normalized to unit sum.

    Full width (FWHM) is 2R broadened by (1 + height/R); the support radius
    equals the full width.
    """
    if height <= 0:
        raise ValueError("height must be positive")
    fw = 2.0 * tip.R * (1.0 + height / tip.R)
    m = max(int(math.ceil(fw / pitch)), 1)
    offsets = np.arange(-m, m + 1) * pitch
    xx, yy = np.meshgrid(offsets, offsets)
    r = np.hypot(xx, yy)
    kern = np.where(r <= fw, 1.0 + np.cos(np.pi * np.minimum(r / fw, 1.0)), 0.0)
    return kern / kern.sum()


def simulate_scan(
    material: MaterialMap,
    height: float,
    tip: TipModel,
    res: ResonatorParams,
    cal: CalibrationResult,
    noise_c_rms: float = 0.0,
    seed: int = 0,
    channel: str = "phase_rad",
) -> ScanImage:
    """Synthesize a constant-height scan image of a material map.

    res.f0 is the resonance with the tip over metal at the scan height; the
    probe tone sits there, and the phase offset is chosen so metal reads
    exactly zero phase.  Dielectric pixels shift the resonance up by
    (C_metal - C_pixel)/alpha_cal.  Pixel noise (rms in farads) is drawn
    from a counter-based Philox stream keyed by the seed, consumed in
    row-major pixel order, so the image is reproducible regardless of any
    internal parallelism.
    """
    if channel not in ("phase_rad", "delta_f0_hz"):
        raise ValueError(f"unknown channel {channel!r}")
    if height <= 0:
        raise ValueError("height must be positive")

    kern = tip_kernel(material.pitch, tip, height)
    rbar = ndimage.convolve(material.response(), kern, mode="nearest")
    series_c = float(_sphere_plane_series(height, tip.R, tip.series_terms))
    delta_c = (1.0 - rbar) * series_c  # C_metal - C_pixel >= 0
    if noise_c_rms > 0:
        rng = np.random.Generator(np.random.Philox(key=seed))
        delta_c = delta_c + rng.normal(0.0, noise_c_rms, size=delta_c.shape)
    df_up = delta_c / cal.alpha_cal

    if channel == "delta_f0_hz":
        return ScanImage(df_up, material.pitch, channel, material.origin)

    # phase at the fixed probe tone res.f0, referenced to the metal value;
    # the environment phase (B, tau at fixed f) cancels in the difference
    q = total_q(res)
    f0_pix = res.f0 + df_up
    x = (res.f0 - f0_pix) / f0_pix
    mterm = 1.0 - 2.0 * (q / res.Qc) * np.exp(1j * res.theta) / (1.0 + 2j * q * x)
    m_ref = 1.0 - 2.0 * (q / res.Qc) * np.exp(1j * res.theta)
    phase = np.angle(mterm) - np.angle(m_ref)
    return ScanImage(phase, material.pitch, channel, material.origin)


def edge_resolution(linecut, pitch: float) -> float:
    """10%-90% rise distance of a single monotone edge, by linear interpolation."""
    v = np.asarray(linecut, dtype=float)
    if v.ndim != 1 or v.size < 4:
        raise ValueError("linecut must be 1-D with at least 4 samples")
    if not pitch > 0:
        raise ValueError("pitch must be positive")
    vrange = v.max() - v.min()
    if vrange == 0:
        raise ValueError("flat linecut: no edge to measure")
    u = (v - v.min()) / vrange
    if u[-1] < u[0]:
        u = u[::-1]
    if np.any(np.diff(u) < -1e-9):
        raise ValueError("linecut is not monotone across the edge")
    u = np.maximum.accumulate(u)
    x = np.arange(u.size) * pitch

    def crossing(level: float) -> float:
        i = int(np.searchsorted(u, level))
        if i == 0:
            return x[0]
        frac = (level - u[i - 1]) / (u[i] - u[i - 1])
        return x[i - 1] + frac * pitch

    return crossing(0.9) - crossing(0.1)
