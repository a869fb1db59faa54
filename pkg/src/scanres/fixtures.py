"""Deterministic synthetic datasets bundled with the package.

Every fixture is generated from fixed ground-truth parameters and a fixed
seed, so the fitting commands can be checked against known answers.  Run
``python -m scanres.fixtures`` to regenerate the files under scanres/data.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import io as sio
from .fitting import phase_slope_at_resonance
from .loss import QpParams, TlsParams, qp_loss, tls_loss
from .quantities import dbm_to_watts, watts_to_dbm
from .response import NoiseSpec, ResonatorParams, linear_grid, synthesize_trace
from .sensitivity import PhaseTimeSeries
from .tipsample import CalibrationResult, MaterialMap, TipModel, delta_cap

DATA_DIR = Path(__file__).parent / "data"

# the sensor of record: tip resonator at base temperature
GOLDEN_PARAMS = ResonatorParams(
    f0=7.955e9, Qi=11900.0, Qc=12000.0, theta=-0.16,
    B_mag=0.9, B_phase=0.3, tau=50e-9,
)

# loss-channel ground truth used across fixtures
LOSS_TRUTH = {
    "delta0_tls": 2.3e-5,
    "Pc": 1e-14,            # W (-110 dBm)
    "Q_sat": 18000.0,
    "Q_other": 18000.0,
    "Tc": 10.0,             # K
}

TIP = TipModel(R=1e-6, C_stray=0.0, series_terms=20)
CAL_TRUTH = {"d0": 5e-6, "alpha_cal": 1.12e-23}   # m, F/Hz (1.12e-8 fF/Hz)


def make_golden_trace(sigma: float = 0.002, seed: int = 7, n_points: int = 401):
    grid = linear_grid(GOLDEN_PARAMS, n_points=n_points, n_linewidths=30.0)
    return synthesize_trace(GOLDEN_PARAMS, grid, NoiseSpec(sigma, seed))


def make_power_sweep(n_points: int = 16):
    """(P_watts, Qi) rows from the TLS + saturated-loss power model."""
    p_dbm = np.linspace(-150.0, -90.0, n_points)
    p_w = np.array([dbm_to_watts(p) for p in p_dbm])
    tls = TlsParams(LOSS_TRUTH["delta0_tls"], LOSS_TRUTH["Pc"])
    omega = 2.0 * math.pi * GOLDEN_PARAMS.f0
    inv_q = 1.0 / LOSS_TRUTH["Q_sat"] + tls_loss(tls, omega, 0.010, p_w)
    return np.column_stack([p_w, 1.0 / inv_q])


def make_temperature_sweep(n_points: int = 25):
    """(T_K, Qi) rows from the composite low-power temperature model."""
    t_k = np.linspace(0.02, 4.0, n_points)
    omega = 2.0 * math.pi * GOLDEN_PARAMS.f0
    tls = TlsParams(LOSS_TRUTH["delta0_tls"], LOSS_TRUTH["Pc"])
    qp = QpParams(Tc=LOSS_TRUTH["Tc"])
    inv_q = (1.0 / LOSS_TRUTH["Q_other"]
             + tls_loss(tls, omega, t_k, 0.0)
             + qp_loss(qp, omega, t_k))
    return np.column_stack([t_k, 1.0 / inv_q])


def make_approach_curve(n_points: int = 40):
    """(z_m, delta_f0_hz) rows: downward shift growing as the tip approaches."""
    z = np.linspace(0.0, 4.5e-6, n_points)
    df = delta_cap(CAL_TRUTH["d0"] - z, TIP) / CAL_TRUTH["alpha_cal"]
    return np.column_stack([z, df])


def make_hole_map(n: int = 64, pitch: float = 0.25e-6, hole_um: float = 10.0,
                  eps_r: float = 10.0) -> MaterialMap:
    """Metal film with a centered square dielectric hole."""
    grid = np.zeros((n, n))
    half = int(round(hole_um * 1e-6 / pitch / 2))
    c = n // 2
    grid[c - half : c + half, c - half : c + half] = eps_r
    return MaterialMap(grid, pitch)


def make_calibration() -> CalibrationResult:
    """The ground-truth calibration corresponding to the approach fixture."""
    return CalibrationResult(d0=CAL_TRUTH["d0"], alpha_cal=CAL_TRUTH["alpha_cal"],
                             residual_rms=0.0)


def sensitivity_sigma(target_dc_asd: float = 3e-21) -> float:
    """Per-sample phase sigma giving a white capacitance ASD of the target.

    Inverts the chain for fs = 1 kHz: asd_phi = sigma*sqrt(2/fs), delta_f =
    asd_phi/|slope|, delta_C = alpha*delta_f.  With the golden resonator and
    the calibrated alpha this pins the paper-scale zF/rtHz headline number.
    """
    slope = abs(phase_slope_at_resonance(GOLDEN_PARAMS))
    return target_dc_asd * slope / (CAL_TRUTH["alpha_cal"] * math.sqrt(2.0 / 1000.0))


def make_phase_noise(sample_rate: float = 1000.0, n_samples: int = 8192,
                     seed: int = 11, sigma: float | None = None) -> PhaseTimeSeries:
    """White phase noise sized so delta_C(1 Hz) lands at ~3 zF/sqrt(Hz)."""
    if sigma is None:
        sigma = sensitivity_sigma() * math.sqrt(sample_rate / 1000.0)
    rng = np.random.default_rng(seed)
    return PhaseTimeSeries(sample_rate, rng.normal(0.0, sigma, n_samples))


# Table of measured devices: geometry is metadata; EC/EJ are the fit
# inputs used by the spectrum tests (GHz in the file, Hz in memory).
DEVICE_TABLE = [
    ("X0", 20, 94, 10, 0.27, 22, 1.8),
    ("X1", 30, 94, 15, 0.28, 21, 1.6),
    ("X2", 30, 118, 30, 0.29, 20, 1.7),
    ("X3", 15, 118, 15, 0.27, 23, 2.4),
    ("X4", 20, 118, 20, 0.28, 23, 2.2),
    ("X5", 30, 225, 30, 0.16, 42, 1.3),
    ("X6", 30, 105, 30, 0.31, 26, 0.8),
    ("X7", 30, 100, 30, 0.33, 20, 1.1),
    ("X8", 30, 118, 30, 0.29, 18, 1.8),
    ("P0", 200, 280, 40, 0.27, 32, 0.7),
    ("P1", 200, 250, 40, 0.30, 27, 0.9),
    ("P2", 200, 280, 40, 0.27, 25, 1.7),
    ("P3", 200, 330, 40, 0.25, 28, 1.0),
    ("P4", 200, 310, 80, 0.25, 28, 1.0),
    ("P5", 200, 235, 10, 0.24, 27, 1.6),
    ("P6", 200, 280, 40, 0.27, 29, 1.4),
    ("P7", 200, 265, 20, 0.25, 29, 1.1),
]


def write_all(data_dir: Path | None = None) -> None:
    out = Path(data_dir) if data_dir else DATA_DIR
    out.mkdir(parents=True, exist_ok=True)

    sio.write_trace(out / "golden_trace.csv", make_golden_trace())

    sweep = make_power_sweep()
    sio._write_csv(out / "power_sweep.csv", ["p_dbm", "qi"],
                   [(watts_to_dbm(p), q) for p, q in sweep])
    sio._write_csv(out / "temperature_sweep.csv", ["t_k", "qi"], make_temperature_sweep())
    sio._write_csv(out / "approach_curve.csv", ["z_m", "delta_f0_hz"], make_approach_curve())

    sio.write_material_map(out / "hole_map.csv", make_hole_map())

    series = make_phase_noise()
    t = np.arange(series.samples.size) / series.sample_rate
    sio._write_csv(out / "phase_noise.csv", ["t_s", "phase_rad"],
                   zip(t, series.samples))

    sio._write_csv(out / "table_s1.csv",
                   ["device", "w_um", "l_um", "s_um", "ec_ghz", "ej_ghz", "t2r_us"],
                   DEVICE_TABLE)


if __name__ == "__main__":
    write_all()
