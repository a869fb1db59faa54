"""Extraction of {f0, Qi, Qc, theta, B, tau} from a complex reflection trace.

Pipeline: estimate the electrical delay from the off-resonant phase slope,
fit the delay-corrected IQ locus with an algebraic circle fit, derive a
starting point, then refine all 7 real parameters with Levenberg-Marquardt
on the stacked Re/Im residuals.  Qi and Qc are fitted as logs so positivity
needs no constrained solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .lm import levenberg_marquardt
from .response import ComplexTrace, ResonatorParams, total_q

PARAM_NAMES = ("f0", "Qi", "Qc", "theta", "B_mag", "B_phase", "tau")


@dataclass(frozen=True)
class FitConfig:
    max_iter: int = 200
    rel_tol: float = 1e-10
    damping_init: float = 1e-3
    # box constraints in internal coordinates [f0, lnQi, lnQc, theta, B_mag, B_phase, tau]
    bounds: tuple | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


@dataclass(frozen=True)
class FitResult:
    params: ResonatorParams
    residual_rms: float
    iterations: int
    converged: bool
    stderr: dict = field(default_factory=dict)   # 1-sigma per parameter, natural units

    def __post_init__(self):
        if self.residual_rms < 0:
            raise ValueError("residual_rms must be >= 0")


def estimate_delay(trace: ComplexTrace, wing_fraction: float = 0.2) -> float:
    """Delay from the unwrapped-phase slope over the outer wings of the sweep.

    Uses the outer `wing_fraction` of points on each side; the resonator's
    1/(f-f0) phase tail leaks into the slope, so the estimate is only an
    initializer unless the sweep is many linewidths wide.
    """
    n = len(trace)
    k = int(round(wing_fraction * n))
    if 2 * k < 4:
        raise ValueError("need at least 4 wing points to estimate the delay")
    idx = np.r_[0:k, n - k : n]
    phase = np.unwrap(np.angle(trace.samples))
    slope = np.polyfit(trace.freqs[idx], phase[idx], 1)[0]
    return float(slope)


def circle_fit(trace_or_samples) -> tuple[complex, float]:
    """Algebraic least-squares circle (Taubin) through complex samples.

    Returns (center, radius).  Expects delay-corrected data; raises on
    degenerate (collinear or single-point) input.
    """
    z = trace_or_samples.samples if isinstance(trace_or_samples, ComplexTrace) else np.asarray(trace_or_samples)
    x, y = z.real.astype(float), z.imag.astype(float)
    xm, ym = x.mean(), y.mean()
    u, v = x - xm, y - ym
    suu, svv, suv = (u * u).sum(), (v * v).sum(), (u * v).sum()
    rhs = 0.5 * np.array([(u**3).sum() + (u * v * v).sum(), (v**3).sum() + (v * u * u).sum()])
    mat = np.array([[suu, suv], [suv, svv]])
    if abs(np.linalg.det(mat)) < 1e-30 * max(suu + svv, 1e-300) ** 2 or (suu + svv) == 0:
        raise ValueError("degenerate point set: cannot fit a circle")
    cx, cy = np.linalg.solve(mat, rhs)
    radius = math.sqrt(cx * cx + cy * cy + (suu + svv) / len(x))
    if not radius > 0:
        raise ValueError("circle fit produced non-positive radius")
    return complex(cx + xm, cy + ym), radius


def _circle_misfit(trace: ComplexTrace, tau: float) -> float:
    """Normalized radial scatter of the delay-corrected IQ locus."""
    w = trace.samples * np.exp(-1j * tau * trace.freqs)
    try:
        center, radius = circle_fit(w)
    except ValueError:
        return np.inf
    dev = np.abs(w - center) - radius
    return float(np.mean(dev**2) / radius**2)


def refine_delay(trace: ComplexTrace, tau0: float) -> float:
    """Polish a delay estimate by restoring the circularity of the locus.

    The wing regression is biased by the resonator's 1/(f-f0) phase tail on
    short sweeps; the locus is only a circle at the true delay, which makes
    circularity a far sharper criterion.  Scans tau0 +- 10 phase-wrap
    periods of the sweep, then refines with a bounded scalar minimizer.
    """
    span = trace.freqs[-1] - trace.freqs[0]
    period = 2.0 * np.pi / span
    grid = tau0 + period * np.linspace(-10, 10, 81)
    costs = [_circle_misfit(trace, t) for t in grid]
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: _circle_misfit(trace, t), bounds=(lo, hi),
                          method="bounded", options={"xatol": period * 1e-9})
    return float(res.x) if res.fun <= costs[i] else float(grid[i])


def initial_guess(trace: ComplexTrace) -> ResonatorParams:
    """Starting parameters from delay regression + circle geometry + phase response."""
    tau0 = refine_delay(trace, estimate_delay(trace))
    w = trace.samples * np.exp(-1j * tau0 * trace.freqs)

    k = max(2, int(0.1 * len(trace)))
    b0 = complex(np.mean(np.r_[w[:k], w[-k:]]))
    if abs(b0) == 0:
        raise ValueError("off-resonant level is zero; cannot normalize")
    u = w / b0

    center, radius = circle_fit(u)

    phase = np.unwrap(np.angle(u - center))
    dph = np.gradient(phase, trace.freqs)
    i_pk = int(np.argmax(np.abs(dph)))
    peak = abs(dph[i_pk])
    if peak < 3.0 * np.median(np.abs(dph)) or i_pk in (0, len(trace) - 1):
        raise ValueError("no resonance detected in trace")
    f0 = float(trace.freqs[i_pk])

    # loaded Q from the full width of the phase-derivative peak
    above = np.abs(dph) > 0.5 * peak
    fw = float(trace.freqs[above][-1] - trace.freqs[above][0])
    q = f0 / fw if fw > 0 else f0 / (trace.freqs[-1] - trace.freqs[0])

    theta = float(np.angle(1.0 - center))
    theta = max(min(theta, 1.45), -1.45)
    qc = q / radius
    qi_inv = 1.0 / q - math.cos(theta) / qc
    qi = 1.0 / qi_inv if qi_inv > 0 else 100.0 * q

    return ResonatorParams(
        f0=f0, Qi=qi, Qc=qc, theta=theta, B_mag=abs(b0), B_phase=float(np.angle(b0)), tau=tau0
    )


def _model_and_grad(f: np.ndarray, p: np.ndarray):
    """S11 and dS11/dp for p = [f0, lnQi, lnQc, theta, B_mag, B_phase, tau]."""
    f0, lqi, lqc, theta, bmag, bphase, tau = p
    qi, qc = math.exp(lqi), math.exp(lqc)
    ct, st = math.cos(theta), math.sin(theta)
    q = 1.0 / (1.0 / qi + ct / qc)
    x = (f - f0) / f0
    d = 1.0 + 2j * q * x
    eith = complex(math.cos(theta), math.sin(theta))
    m = 1.0 - 2.0 * (q / qc) * eith / d
    env = bmag * np.exp(1j * bphase) * np.exp(1j * tau * f)
    s = env * m

    dm_dq = -2.0 * eith * (1.0 / (qc * d) - 2j * x * q / (qc * d * d))
    dq_dqi = q * q / (qi * qi)
    dq_dqc = q * q * ct / (qc * qc)
    dq_dth = q * q * st / qc
    dm_df0 = (2.0 * q / qc) * eith * (2j * q) / (d * d) * (-f / (f0 * f0))
    dm_dqc_expl = 2.0 * q * eith / (qc * qc * d)
    dm_dth_expl = 1j * (m - 1.0)

    grad = np.empty((7, f.size), dtype=complex)
    grad[0] = env * dm_df0
    grad[1] = env * dm_dq * dq_dqi * qi            # wrt lnQi
    grad[2] = env * (dm_dq * dq_dqc + dm_dqc_expl) * qc  # wrt lnQc
    grad[3] = env * (dm_dq * dq_dth + dm_dth_expl)
    grad[4] = s / bmag
    grad[5] = 1j * s
    grad[6] = 1j * f * s
    return s, grad


def _default_bounds(trace: ComplexTrace):
    lo = np.array([trace.freqs[0], math.log(10.0), math.log(10.0), -1.5, 1e-12, -1e9, -1e-5])
    hi = np.array([trace.freqs[-1], math.log(1e10), math.log(1e10), 1.5, 1e6, 1e9, 1e-5])
    return lo, hi


def _wrap_angle(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def fit_s11(
    trace: ComplexTrace,
    config: FitConfig = FitConfig(),
    init: ResonatorParams | None = None,
) -> FitResult:
    """Least-squares fit of the reflection model to a trace.

    Minimizes sum |S11_model - data|^2 over the 7 real parameters with
    uniform weights.  Non-convergence is reported through the `converged`
    flag with best-so-far parameters; singular normal equations raise.
    """
    if init is None:
        init = initial_guess(trace)

    p0 = np.array([
        init.f0, math.log(init.Qi), math.log(init.Qc), init.theta,
        init.B_mag, init.B_phase, init.tau,
    ])
    data = trace.samples
    freqs = trace.freqs

    def residual_jac(p):
        s, grad = _model_and_grad(freqs, p)
        diff = s - data
        r = np.concatenate([diff.real, diff.imag])
        jac = np.concatenate([grad.real, grad.imag], axis=1).T
        return r, jac

    bounds = config.bounds if config.bounds is not None else _default_bounds(trace)
    res = levenberg_marquardt(
        residual_jac, p0,
        max_iter=config.max_iter, rel_tol=config.rel_tol,
        damping_init=config.damping_init, bounds=bounds,
    )

    f0, lqi, lqc, theta, bmag, bphase, tau = res.params
    params = ResonatorParams(
        f0=f0, Qi=math.exp(lqi), Qc=math.exp(lqc), theta=theta,
        B_mag=bmag, B_phase=_wrap_angle(bphase), tau=tau,
    )
    # residual_rms over complex points: ||S - data|| / sqrt(N)
    rms = math.sqrt(2.0 * res.cost / len(trace))
    err = res.stderr
    stderr = {
        "f0": err[0],
        "Qi": params.Qi * err[1],   # log-parameter uncertainty to linear
        "Qc": params.Qc * err[2],
        "theta": err[3],
        "B_mag": err[4],
        "B_phase": err[5],
        "tau": err[6],
    }
    return FitResult(
        params=params, residual_rms=rms, iterations=res.iterations,
        converged=res.converged, stderr=stderr,
    )


def phase_slope_at_resonance(params: ResonatorParams) -> float:
    """d(arg S11)/df at f0 with the tau phase ramp removed, rad/Hz.

    With M(f) the resonant factor, the slope is Im[M'(f0)/M(f0)] where
    M(f0) = 1 - 2(Q/Qc)e^{i theta} and M'(f0) = 4 i Q^2 e^{i theta}/(Qc f0).
    """
    q = total_q(params)
    eith = complex(math.cos(params.theta), math.sin(params.theta))
    m0 = 1.0 - 2.0 * (q / params.Qc) * eith
    if abs(m0) == 0:
        raise ValueError("phase slope undefined: S11 passes through the origin")
    mp = 4j * q * q * eith / (params.Qc * params.f0)
    return float((mp / m0).imag)
