"""Transmon spectrum, tip-coupled Purcell decay, and coherence experiments.

Energies are stored as frequencies (E/h, Hz) throughout.  The qubit is the
Cooper-pair box diagonalized in the charge basis,

    H = 4 EC (n - ng)^2 - (EJ/2) sum_n (|n><n+1| + h.c.),

and the g -> f two-photon line sits at (E2 - E0)/2.  Coupling to the
scanning resonator is proportional to the distance-dependent part of the
tip-sample capacitance, anchored at a reference distance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .lm import levenberg_marquardt
from .tipsample import TipModel, coupling_capacitance


@dataclass(frozen=True)
class TransmonParams:
    EC: float            # charging energy, Hz
    EJ: float            # Josephson energy, Hz
    ng: float = 0.0      # offset charge
    ncut: int = 30       # charge basis cutoff: n in [-ncut, ncut]

    def __post_init__(self):
        if not (self.EC > 0 and self.EJ > 0):
            raise ValueError("EC and EJ must be positive")
        if self.ncut < 10:
            raise ValueError("ncut must be >= 10")
        if not self.transmon_regime:
            warnings.warn(
                f"EJ/EC = {self.EJ / self.EC:.1f} < 10: outside the transmon regime",
                stacklevel=2,
            )

    @property
    def transmon_regime(self) -> bool:
        return self.EJ / self.EC >= 10.0


@dataclass(frozen=True)
class QubitResonatorParams:
    g: float        # coupling rate, Hz
    delta: float    # qubit-resonator detuning w_q - w_r, Hz (signed)
    kappa: float    # resonator linewidth, Hz

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.delta == 0:
            raise ValueError("dispersive formulas need a nonzero detuning")


def _levels(ec: float, ej: float, ng: float, ncut: int, n_levels: int) -> np.ndarray:
    charge = np.arange(-ncut, ncut + 1)
    diag = 4.0 * ec * (charge - ng) ** 2
    off = np.full(2 * ncut, -ej / 2.0)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, n_levels - 1))


def transmon_levels(p: TransmonParams, n_levels: int = 3, check_cutoff: bool = True) -> np.ndarray:
    """Lowest eigenfrequencies (Hz) of the charge-basis Hamiltonian, ascending.

    Raises if the requested levels have not converged in the cutoff
    (eigenvalue shift > 1 kHz when ncut grows by 5).
    """
    if n_levels < 1 or n_levels > 2 * p.ncut:
        raise ValueError("n_levels must be in [1, 2*ncut]")
    ev = _levels(p.EC, p.EJ, p.ng, p.ncut, n_levels)
    if check_cutoff:
        ev_big = _levels(p.EC, p.EJ, p.ng, p.ncut + 5, n_levels)
        if np.max(np.abs(ev - ev_big)) > 1e3:
            raise ValueError(
                f"ncut={p.ncut} too small: levels shift by "
                f"{np.max(np.abs(ev - ev_big)):.3g} Hz when increased"
            )
    return ev


def transition_frequencies(p: TransmonParams) -> tuple[float, float]:
    """(f_ge, f_gf2): the g-e transition and the two-photon g-f line (E2-E0)/2."""
    ev = transmon_levels(p, 3)
    return float(ev[1] - ev[0]), float((ev[2] - ev[0]) / 2.0)


def invert_spectrum(f_ge: float, f_gf2: float, ng: float = 0.0, ncut: int = 30) -> TransmonParams:
    """Find (EC, EJ) reproducing the measured f_ge and two-photon f_gf2.

    Damped Newton on the forward diagonalization; the anharmonicity
    relation EC ~ 2(f_ge - f_gf2) and sqrt(8 EJ EC) ~ f_ge + EC seed the
    iteration.  Converges to better than 1 kHz in both transitions.
    """
    if not f_gf2 < f_ge:
        raise ValueError("expect f_gf2 < f_ge (negative transmon anharmonicity)")
    ec = 2.0 * (f_ge - f_gf2)
    ej = (f_ge + ec) ** 2 / (8.0 * ec)
    target = np.array([f_ge, f_gf2])

    def forward(ec_, ej_):
        ev = _levels(ec_, ej_, ng, ncut, 3)
        return np.array([ev[1] - ev[0], (ev[2] - ev[0]) / 2.0])

    p = np.log([ec, ej])
    for _ in range(60):
        f = forward(*np.exp(p))
        err = f - target
        if np.max(np.abs(err)) < 0.5:  # Hz; far below the 1 kHz contract
            break
        # numerical Jacobian in log parameters
        jac = np.empty((2, 2))
        h = 1e-7
        for j in range(2):
            ph = p.copy()
            ph[j] += h
            jac[:, j] = (forward(*np.exp(ph)) - f) / h
        try:
            step = np.linalg.solve(jac, -err)
        except np.linalg.LinAlgError:
            raise ValueError("no transmon-regime solution: singular spectrum Jacobian")
        # damping keeps EJ/EC from collapsing out of the transmon regime
        step = np.clip(step, -0.5, 0.5)
        p = p + step
    else:
        raise ValueError(
            f"spectrum inversion did not converge: residual {err} Hz "
            f"at EC={math.exp(p[0]):.4g}, EJ={math.exp(p[1]):.4g}"
        )
    ec, ej = np.exp(p)
    if ej / ec < 10:
        raise ValueError(f"solution EJ/EC = {ej / ec:.2f} is outside the transmon regime")
    return TransmonParams(EC=float(ec), EJ=float(ej), ng=ng, ncut=ncut)


def coupling_vs_distance(d, tip: TipModel, g_ref: float, d_ref: float):
    """Coupling proxy g(d) = g_ref * C_dd(d)/C_dd(d_ref), with C_dd the
    distance-dependent part of the tip-sample capacitance."""
    if g_ref < 0 or d_ref <= 0:
        raise ValueError("g_ref must be >= 0 and d_ref > 0")
    ratio = coupling_capacitance(d, tip) / coupling_capacitance(d_ref, tip)
    return g_ref * ratio


def purcell_rate(qr: QubitResonatorParams) -> float:
    """Purcell relaxation rate (g/Delta)^2 * kappa, Hz."""
    return (qr.g / qr.delta) ** 2 * qr.kappa


def dispersive_shift(g: float, delta: float, ec: float) -> float:
    """Transmon dispersive shift chi = -g^2 EC / (Delta (Delta - EC)), Hz."""
    if delta == 0 or delta == ec:
        raise ValueError("resonant denominator in dispersive shift")
    return -(g * g) * ec / (delta * (delta - ec))


def gamma1_vs_distance(
    ds,
    qr: QubitResonatorParams,
    tip: TipModel,
    g_ref: float,
    d_ref: float,
    gamma_other: float,
) -> list:
    """[(d, Gamma1)] with Gamma1(d) = Purcell(g(d)) + gamma_other."""
    if gamma_other < 0:
        raise ValueError("gamma_other must be >= 0")
    out = []
    for d in np.atleast_1d(np.asarray(ds, dtype=float)):
        g = float(coupling_vs_distance(d, tip, g_ref, d_ref))
        rate = purcell_rate(QubitResonatorParams(g=g, delta=qr.delta, kappa=qr.kappa))
        out.append((float(d), rate + gamma_other))
    return out


def g_ref_for_t1(
    t1: float,
    d: float,
    qr: QubitResonatorParams,
    tip: TipModel,
    d_ref: float,
    gamma_other: float,
) -> float:
    """Anchor coupling: the g_ref making Gamma1(d) = 1/t1 (closed form)."""
    rate = 1.0 / t1 - gamma_other
    if rate <= 0:
        raise ValueError("1/T1 must exceed the distance-independent rate")
    g_at_d = abs(qr.delta) * math.sqrt(rate / qr.kappa)
    return g_at_d * float(coupling_capacitance(d_ref, tip) / coupling_capacitance(d, tip))


@dataclass(frozen=True)
class CoherenceTrace:
    delays: np.ndarray       # s, ascending
    signal: np.ndarray       # excited-state population estimate
    kind: str                # "t1" | "ramsey" | "echo"

    def __post_init__(self):
        delays = np.asarray(self.delays, dtype=float)
        signal = np.asarray(self.signal, dtype=float)
        if delays.ndim != 1 or delays.shape != signal.shape:
            raise ValueError("delays and signal must be 1-D arrays of equal length")
        if np.any(np.diff(delays) <= 0):
            raise ValueError("delays must be strictly ascending")
        if self.kind not in ("t1", "ramsey", "echo"):
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "signal", signal)


def simulate_decay(
    kind: str,
    delays,
    *,
    time_constant: float,
    detuning: float = 0.0,
    sigma: float = 0.0,
    seed: int = 0,
    quasistatic_sigma: float = 0.0,
    n_shots: int = 1,
) -> CoherenceTrace:
    """Generate a coherence experiment trace.

    t1: exp(-t/T1); ramsey: 1/2 + cos(2 pi df t) exp(-t/T2)/2; echo:
    1/2 + exp(-t/T2)/2.  `quasistatic_sigma` adds a shot-to-shot Gaussian
    detuning (Hz) that dephases Ramsey fringes but is refocused by the
    echo; `sigma` is Gaussian readout noise per averaged point.
    """
    delays = np.asarray(delays, dtype=float)
    if np.any(np.diff(delays) <= 0):
        raise ValueError("delays must be strictly ascending")
    if time_constant <= 0:
        raise ValueError("time constant must be positive")
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    rng = np.random.default_rng(seed)

    if kind == "t1":
        sig = np.exp(-delays / time_constant)
    elif kind == "echo":
        sig = 0.5 + 0.5 * np.exp(-delays / time_constant)
    elif kind == "ramsey":
        env = np.exp(-delays / time_constant)
        if quasistatic_sigma > 0:
            dq = rng.normal(0.0, quasistatic_sigma, size=n_shots)
            osc = np.cos(2.0 * np.pi * np.outer(dq, delays)
                         + 2.0 * np.pi * detuning * delays).mean(axis=0)
        else:
            osc = np.cos(2.0 * np.pi * detuning * delays)
        sig = 0.5 + 0.5 * osc * env
    else:
        raise ValueError(f"unknown experiment kind {kind!r}")

    if sigma > 0:
        sig = sig + rng.normal(0.0, sigma, size=delays.size)
    return CoherenceTrace(delays, sig, kind)


@dataclass(frozen=True)
class DecayFitResult:
    time_constant: float
    amplitude: float
    offset: float
    detuning: float | None      # only for ramsey
    stderr: dict
    converged: bool


def fit_decay(trace: CoherenceTrace) -> DecayFitResult:
    """Least-squares fit of the decay model matching the experiment tag.

    Needs >= 8 points spanning >= 1.5 time constants (checked against the
    fitted value).  Non-convergence is reported via the flag.
    """
    t, y = trace.delays, trace.signal
    if t.size < 8:
        raise ValueError("need at least 8 points to fit a decay")

    if trace.kind == "t1":
        off0, amp0 = min(float(y[-1]), 0.49), 1.0
    else:
        off0, amp0 = 0.5, 0.5
    tc0 = _decay_scale_guess(t, y, off0)

    if trace.kind == "ramsey":
        df0 = _dominant_frequency(t, y)
        p0 = np.array([math.log(tc0), amp0, off0, df0])

        def residual_jac(p):
            ltc, amp, off, df = p
            tc = math.exp(ltc)
            env = np.exp(-t / tc)
            osc = np.cos(2.0 * np.pi * df * t)
            model = off + amp * osc * env
            jac = np.empty((t.size, 4))
            jac[:, 0] = amp * osc * env * (t / tc)      # wrt ln tc
            jac[:, 1] = osc * env
            jac[:, 2] = 1.0
            jac[:, 3] = -amp * env * np.sin(2.0 * np.pi * df * t) * 2.0 * np.pi * t
            return model - y, jac
    else:
        p0 = np.array([math.log(tc0), amp0, off0])

        def residual_jac(p):
            ltc, amp, off = p
            tc = math.exp(ltc)
            env = np.exp(-t / tc)
            model = off + amp * env
            jac = np.empty((t.size, 3))
            jac[:, 0] = amp * env * (t / tc)
            jac[:, 1] = env
            jac[:, 2] = 1.0
            return model - y, jac

    res = levenberg_marquardt(residual_jac, p0, max_iter=400, rel_tol=1e-12)
    tc = math.exp(res.params[0])
    if t[-1] - t[0] < 1.5 * tc:
        raise ValueError("delays span less than 1.5 fitted time constants")
    stderr = {
        "time_constant": tc * res.stderr[0],
        "amplitude": res.stderr[1],
        "offset": res.stderr[2],
    }
    detuning = None
    if trace.kind == "ramsey":
        detuning = float(abs(res.params[3]))
        stderr["detuning"] = res.stderr[3]
    return DecayFitResult(
        time_constant=float(tc),
        amplitude=float(res.params[1]),
        offset=float(res.params[2]),
        detuning=detuning,
        stderr=stderr,
        converged=res.converged,
    )


def _decay_scale_guess(t, y, offset):
    """Crude 1/e-crossing estimate of the decay time."""
    env = np.abs(y - offset)
    top = env[: max(2, t.size // 8)].mean()
    below = np.nonzero(env < top / math.e)[0]
    if below.size:
        return max(float(t[below[0]]), float(t[1]))
    return float(t[-1] - t[0])


def _dominant_frequency(t, y):
    """Fringe frequency guess from the periodogram of the demeaned signal."""
    dt = float(np.median(np.diff(t)))
    n = t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), n=4 * n))
    freqs = np.fft.rfftfreq(4 * n, dt)
    i_pk = int(np.argmax(spec[1:])) + 1
    return float(freqs[i_pk])


def two_tone_spectrum(
    p: TransmonParams,
    qr: QubitResonatorParams,
    probe_powers,
    drive_freqs,
    gamma2: float = 2e6,
    p_sat: float = 1.0,
) -> np.ndarray:
    """Synthetic two-tone map, one row per drive power.

    Lorentzian dip at f_ge with power-broadened width gamma2*sqrt(1+P/Psat);
    the two-photon g-f line at f_gf2 turns on as (P/Psat)^2, capped at the
    main-line amplitude.  Response amplitude is the dispersive contrast
    2 chi / kappa.
    """
    f_ge, f_gf2 = transition_frequencies(p)
    chi = dispersive_shift(qr.g, qr.delta, p.EC)
    contrast = 2.0 * abs(chi) / qr.kappa
    freqs = np.asarray(drive_freqs, dtype=float)
    rows = []
    for power in probe_powers:
        width = gamma2 * math.sqrt(1.0 + power / p_sat)
        lor_ge = 1.0 / (1.0 + ((freqs - f_ge) / width) ** 2)
        lor_gf = 1.0 / (1.0 + ((freqs - f_gf2) / width) ** 2)
        amp_gf = min((power / p_sat) ** 2, 1.0)
        rows.append(contrast * (lor_ge + amp_gf * lor_gf))
    return np.array(rows)
