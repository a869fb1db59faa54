"""Report figures rendered to files alongside the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .loss import CompositeLossParams, QpParams, TlsParams, qi_power_model, qi_temperature_model
from .response import ComplexTrace, s11_model
from .tipsample import ScanImage, delta_cap


def save(fig, path) -> None:
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fit_s11_figure(trace: ComplexTrace, params) -> plt.Figure:
    """Magnitude + IQ-plane overlay of data and fitted model."""
    model = s11_model(params, trace.freqs)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    f_ghz = trace.freqs / 1e9
    ax1.plot(f_ghz, 20 * np.log10(np.abs(trace.samples)), ".", ms=3, label="data")
    ax1.plot(f_ghz, 20 * np.log10(np.abs(model)), "-", lw=1.5, label="fit")
    ax1.set_xlabel("frequency (GHz)")
    ax1.set_ylabel("|S11| (dB)")
    ax1.legend()
    ax2.plot(trace.samples.real, trace.samples.imag, ".", ms=3)
    ax2.plot(model.real, model.imag, "-", lw=1.5)
    ax2.set_xlabel("Re S11")
    ax2.set_ylabel("Im S11")
    ax2.set_aspect("equal")
    fig.tight_layout()
    return fig


def power_sweep_figure(p_watts, qi, fit: dict, omega: float, t_k: float) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    p_dbm = 10 * np.log10(np.asarray(p_watts) / 1e-3)
    ax.plot(p_dbm, qi, "o", ms=4, label="data")
    grid = np.logspace(np.log10(min(p_watts)), np.log10(max(p_watts)), 200)
    tls = TlsParams(fit["delta0_tls"], fit["Pc"])
    ax.plot(10 * np.log10(grid / 1e-3), qi_power_model(grid, fit["Q_sat"], tls, omega, t_k),
            "-", label="fit")
    ax.set_xlabel("input power (dBm)")
    ax.set_ylabel("$Q_i$")
    ax.legend()
    fig.tight_layout()
    return fig


def temperature_sweep_figure(t_k, qi, fit: dict, omega: float, p_in: float) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(t_k, 1.0 / np.asarray(qi), "o", ms=4, label="data")
    grid = np.linspace(min(t_k), max(t_k), 300)
    comp = CompositeLossParams(
        tls=TlsParams(fit["delta0_tls"], 1.0),
        qp=QpParams(Tc=fit["Tc"]),
        Q_sat=fit["Q_other"], Q_other=fit["Q_other"],
    )
    ax.plot(grid, 1.0 / qi_temperature_model(grid, comp, omega, 0.0), "-", label="fit")
    ax.set_xlabel("temperature (K)")
    ax.set_ylabel("$1/Q_i$")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    return fig


def calibration_figure(z, delta_f0, cal, tip) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(z * 1e6, cal.alpha_cal * delta_f0 * 1e15, "o", ms=4,
            label=r"$\alpha\,\Delta f_0$ (data)")
    grid = np.linspace(z.min(), z.max(), 300)
    ax.plot(grid * 1e6, delta_cap(cal.d0 - grid, tip) * 1e15, "-",
            label=r"$\Delta C$ model")
    ax.set_xlabel("scanner displacement z (um)")
    ax.set_ylabel("capacitance shift (fF)")
    ax.legend()
    fig.tight_layout()
    return fig


def scan_figure(image: ScanImage) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5, 4.2))
    extent_um = np.array([0, image.grid.shape[1], 0, image.grid.shape[0]]) * image.pitch * 1e6
    im = ax.imshow(image.grid, origin="lower", extent=extent_um, cmap="viridis")
    fig.colorbar(im, ax=ax, label=image.channel)
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    fig.tight_layout()
    return fig


def sensitivity_figure(spectrum, bands=None) -> plt.Figure:
    ncols = 2 if bands else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.8 * ncols, 4))
    ax = axes[0] if bands else axes
    sel = spectrum.freqs > 0
    ax.loglog(spectrum.freqs[sel], spectrum.asd[sel] * 1e21)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel(r"$\delta C$ (zF/$\sqrt{\mathrm{Hz}}$)")
    if bands:
        bw = [b for b, _ in bands]
        dc = [v * 1e21 for _, v in bands]
        axes[1].loglog(bw, dc, "o-")
        axes[1].set_xlabel("bandwidth (Hz)")
        axes[1].set_ylabel(r"rms $\delta C$ (zF)")
    fig.tight_layout()
    return fig


def two_tone_figure(drive_freqs, powers, response) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    im = ax.pcolormesh(np.asarray(drive_freqs) / 1e6, np.arange(len(powers)), response,
                       shading="nearest", cmap="magma")
    fig.colorbar(im, ax=ax, label="response")
    ax.set_xlabel("drive frequency (MHz)")
    ax.set_ylabel("power step")
    fig.tight_layout()
    return fig


def purcell_figure(rates, gamma_other: float) -> plt.Figure:
    d = np.array([x for x, _ in rates])
    g1 = np.array([y for _, y in rates])
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(d * 1e6, g1 / 1e6, "o-", label=r"$\Gamma_1$")
    ax.axhline(gamma_other / 1e6, ls="--", c="gray", label="distance-independent")
    ax.set_xlabel("tip-sample distance (um)")
    ax.set_ylabel(r"$\Gamma_1$ (MHz)")
    ax.legend()
    fig.tight_layout()
    return fig
