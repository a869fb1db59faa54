"""TLS and quasiparticle loss/frequency-shift models and sweep fitting.

Loss channels are additive in 1/Qi, so all fits run in loss space with
uniform weights.  The quasiparticle loss is implemented in its physical
(Mattis-Bardeen thermal) form

    delta_qp = alpha_k * (4/pi) * exp(-Delta0/kB T) * sinh(xi) * K0(xi),
    xi = hbar*omega / (2 kB T),

which vanishes as T -> 0; the reciprocal-looking printed variant is kept
behind `printed_form=True` for comparison plots only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lm import levenberg_marquardt
from .quantities import CONSTANTS
from .special import bessel_k0, bessel_k0e, re_digamma_half_plus_imag


@dataclass(frozen=True)
class TlsParams:
    """Two-level-system loss: low-power low-temperature loss and critical power."""

    delta0_tls: float   # dimensionless loss tangent
    Pc: float           # critical saturation power, W

    def __post_init__(self):
        if not (self.delta0_tls > 0 and self.Pc > 0):
            raise ValueError("delta0_tls and Pc must be positive")


@dataclass(frozen=True)
class QpParams:
    """Thermal quasiparticle parameters of the superconducting film."""

    Tc: float              # critical temperature, K
    alpha_k: float = 1.0   # kinetic inductance fraction

    def __post_init__(self):
        if not self.Tc > 0:
            raise ValueError("Tc must be positive")
        if not 0 < self.alpha_k <= 1:
            raise ValueError("alpha_k must be in (0, 1]")

    @property
    def delta0(self) -> float:
        """Superconducting gap 1.76 kB Tc in joules (read-only)."""
        return 1.76 * CONSTANTS.kB * self.Tc


@dataclass(frozen=True)
class CompositeLossParams:
    tls: TlsParams
    qp: QpParams
    Q_sat: float     # residual Q in the high-power limit
    Q_other: float   # residual Q for temperature sweeps

    def __post_init__(self):
        if not (self.Q_sat > 0 and self.Q_other > 0):
            raise ValueError("Q_sat and Q_other must be positive")


def tls_loss(tls: TlsParams, omega: float, T, P_in) -> np.ndarray | float:
    """TLS loss delta0 * tanh(hbar w / 2 kB T) / sqrt(1 + P/Pc)."""
    T = np.asarray(T, dtype=float)
    P_in = np.asarray(P_in, dtype=float)
    if omega <= 0 or np.any(T <= 0) or np.any(P_in < 0):
        raise ValueError("omega and T must be positive, P_in nonnegative")
    val = tls.delta0_tls * np.tanh(CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * T))
    val = val / np.sqrt(1.0 + P_in / tls.Pc)
    return float(val) if val.ndim == 0 else val


def qi_power_model(P_in, Q_sat: float, tls: TlsParams, omega: float, T: float):
    """Qi(P) = 1 / (1/Q_sat + delta_TLS(P))."""
    inv = 1.0 / Q_sat + tls_loss(tls, omega, T, P_in)
    out = 1.0 / inv
    return float(out) if np.ndim(out) == 0 else out


def _qp_loss_raw(tc: float, alpha_k: float, omega: float, T: np.ndarray) -> np.ndarray:
    xi = CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * T)
    gap_ratio = 1.76 * tc / T
    # sinh(xi) K0(xi) written with the scaled Bessel so neither factor
    # overflows at low temperature (xi, gap_ratio both ~ 1/T)
    sinh_k0 = 0.5 * (1.0 - np.exp(-2.0 * xi)) * bessel_k0e(xi)
    return alpha_k * (4.0 / np.pi) * np.exp(-gap_ratio) * sinh_k0


def qp_loss(qp: QpParams, omega: float, T, printed_form: bool = False):
    """Quasiparticle loss vs temperature; valid for 0 < T < Tc.

    With printed_form=True evaluates (pi/4) e^{+Delta0/kBT} / (sinh(xi) K0(xi)),
    which diverges at low temperature; see module docstring.
    """
    T = np.asarray(T, dtype=float)
    if omega <= 0 or np.any(T <= 0):
        raise ValueError("omega and T must be positive")
    if np.any(T >= qp.Tc):
        raise ValueError("quasiparticle model requires T < Tc")
    if printed_form:
        xi = CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * T)
        gap_ratio = qp.delta0 / (CONSTANTS.kB * T)
        out = (np.pi / 4.0) * np.exp(np.minimum(gap_ratio, 700.0)) / (np.sinh(xi) * bessel_k0(xi))
    else:
        out = _qp_loss_raw(qp.Tc, qp.alpha_k, omega, T)
    return float(out) if out.ndim == 0 else out


def qi_temperature_model(T, params: CompositeLossParams, omega: float, P_in: float):
    """Composite Qi(T): 1/Qi = 1/Q_other + delta_TLS + delta_qp."""
    inv = (
        1.0 / params.Q_other
        + tls_loss(params.tls, omega, T, P_in)
        + qp_loss(params.qp, omega, T)
    )
    out = 1.0 / inv
    return float(out) if np.ndim(out) == 0 else out


def qp_frequency_shift(qp: QpParams, T):
    """Fractional shift (alpha_k/2) [tanh(Delta0 / 2 kB T) - 1]; <= 0, -> 0 at T -> 0."""
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("T must be positive")
    out = 0.5 * qp.alpha_k * (np.tanh(qp.delta0 / (2.0 * CONSTANTS.kB * T)) - 1.0)
    return float(out) if out.ndim == 0 else out


def tls_frequency_shift(delta0: float, omega: float, T):
    """TLS fractional frequency shift (digamma form).

    (delta0/pi) [Re psi(1/2 + hbar w / (2 pi i kB T)) - ln(hbar w / (2 pi kB T))];
    the 1/(2 pi i) argument makes the digamma argument 1/2 - i y with
    y = hbar w / (2 pi kB T), and Re psi is even in y.
    """
    T = np.asarray(T, dtype=float)
    if delta0 <= 0 or omega <= 0 or np.any(T <= 0):
        raise ValueError("delta0, omega and T must be positive")
    y = CONSTANTS.hbar * omega / (2.0 * np.pi * CONSTANTS.kB * T)
    out = (delta0 / np.pi) * (re_digamma_half_plus_imag(y) - np.log(y))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SweepFitResult:
    values: dict            # parameter name -> fitted value
    stderr: dict            # parameter name -> 1-sigma uncertainty
    converged: bool
    residual_rms: float     # rms misfit in 1/Qi


def fit_power_sweep(data, omega: float, T: float) -> SweepFitResult:
    """Fit (P_in, Qi) pairs to 1/Qi = 1/Q_sat + delta_TLS(P).

    Returns {delta0_tls, Pc, Q_sat}.  Needs >= 5 points spanning >= 3
    decades of power; all parameters are fitted as logs.
    """
    p_in, qi = _unpack_sweep(data)
    if p_in.size < 5:
        raise ValueError("need at least 5 points for a power-sweep fit")
    if np.any(p_in <= 0):
        raise ValueError("powers must be positive (watts)")
    if p_in.max() / p_in.min() < 1e3:
        raise ValueError("power sweep must span at least 3 decades")
    inv_q = 1.0 / qi

    tanh_f = math.tanh(CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * T))
    q_sat0 = qi.max()
    d0_0 = max(inv_q.max() - 1.0 / q_sat0, 1e-9) / tanh_f
    pc0 = float(np.median(p_in))
    p0 = np.log([d0_0, pc0, q_sat0])

    def residual_jac(p):
        d0, pc, q_sat = np.exp(p)
        sat = np.sqrt(1.0 + p_in / pc)
        delta = d0 * tanh_f / sat
        r = (1.0 / q_sat + delta) - inv_q
        jac = np.empty((p_in.size, 3))
        jac[:, 0] = delta                                   # d/d ln d0
        jac[:, 1] = 0.5 * delta * (p_in / pc) / (sat * sat)  # d/d ln pc
        jac[:, 2] = -1.0 / q_sat                            # d/d ln q_sat
        return r, jac

    res = levenberg_marquardt(residual_jac, p0, max_iter=400, rel_tol=1e-12)
    vals = np.exp(res.params)
    names = ("delta0_tls", "Pc", "Q_sat")
    return SweepFitResult(
        values=dict(zip(names, map(float, vals))),
        stderr={n: float(v * e) for n, v, e in zip(names, vals, res.stderr)},
        converged=res.converged,
        residual_rms=float(np.sqrt(np.mean(res.residual**2))),
    )


def fit_temperature_sweep(data, omega: float, P_in: float, tls_pc: float = math.inf) -> SweepFitResult:
    """Fit (T, Qi) pairs to the composite model; returns {delta0_tls, Q_other, Tc}.

    Assumes the low-power limit unless a finite TLS critical power is
    passed, in which case P_in enters through the saturation factor.
    alpha_k is held at 1 (the film's kinetic inductance dominates).
    """
    t_k, qi = _unpack_sweep(data)
    if t_k.size < 6:
        raise ValueError("need at least 6 points for a temperature-sweep fit")
    if np.any(t_k <= 0):
        raise ValueError("temperatures must be positive")
    inv_q = 1.0 / qi
    sat = np.sqrt(1.0 + P_in / tls_pc) if math.isfinite(tls_pc) else 1.0
    tanh_arg = CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * t_k)

    q_other0 = qi.max()
    d0_0 = max(inv_q[np.argmin(t_k)] - 1.0 / q_other0, 1e-9)

    # Tc seed from the Arrhenius slope of the hot-side quasiparticle tail:
    # ln(delta_qp * pi / (4 sinh(xi) K0(xi))) = -1.76 Tc / T
    tc0 = 4.0 * t_k.max()
    qp_est = inv_q - inv_q.min()
    hot = np.argsort(t_k)[-max(3, t_k.size // 3):]
    hot = hot[qp_est[hot] > 0]
    if hot.size >= 2:
        xi_hot = CONSTANTS.hbar * omega / (2.0 * CONSTANTS.kB * t_k[hot])
        y = np.log(qp_est[hot] * np.pi / (4.0 * np.sinh(xi_hot) * bessel_k0(xi_hot)))
        slope = np.polyfit(1.0 / t_k[hot], y, 1)[0]
        if slope < 0:
            tc0 = max(-slope / 1.76, 1.05 * t_k.max())

    def residual_jac(p):
        d0, q_other, tc = np.exp(p)
        delta_tls = d0 * np.tanh(tanh_arg) / sat
        delta_qp = _qp_loss_raw(tc, 1.0, omega, t_k)
        r = (1.0 / q_other + delta_tls + delta_qp) - inv_q
        jac = np.empty((t_k.size, 3))
        jac[:, 0] = delta_tls
        jac[:, 1] = -1.0 / q_other
        # d delta_qp / d ln Tc = -(Delta0/kB T) * delta_qp (gap enters only
        # through exp(-Delta0/kBT))
        jac[:, 2] = -(1.76 * tc / t_k) * delta_qp
        return r, jac

    # multi-start over the Tc seed; the cost surface has a flat valley
    # where delta0 collapses if Tc starts too high
    res = None
    for tc_start in (tc0, 2.0 * tc0, 4.0 * t_k.max()):
        cand = levenberg_marquardt(
            residual_jac, np.log([d0_0, q_other0, tc_start]),
            max_iter=400, rel_tol=1e-12,
        )
        if res is None or cand.cost < res.cost:
            res = cand
    vals = np.exp(res.params)
    names = ("delta0_tls", "Q_other", "Tc")
    return SweepFitResult(
        values=dict(zip(names, map(float, vals))),
        stderr={n: float(v * e) for n, v, e in zip(names, vals, res.stderr)},
        converged=res.converged,
        residual_rms=float(np.sqrt(np.mean(res.residual**2))),
    )


def _unpack_sweep(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("sweep data must be an iterable of (x, Qi) pairs")
    x, qi = arr[:, 0], arr[:, 1]
    if np.any(qi <= 0):
        raise ValueError("Qi values must be positive")
    return x, qi
