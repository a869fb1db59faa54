import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from scanres.fitting import (
    FitConfig,
    _model_and_grad,
    circle_fit,
    estimate_delay,
    fit_s11,
    initial_guess,
    phase_slope_at_resonance,
)
from scanres.response import (
    ComplexTrace,
    NoiseSpec,
    ResonatorParams,
    linear_grid,
    s11_model,
    synthesize_trace,
    total_q,
)

from oracles import central_difference

PAPER = ResonatorParams(
    f0=7.955e9, Qi=11900.0, Qc=12000.0, theta=-0.16, B_mag=0.9, B_phase=0.3, tau=50e-9
)


def wide_trace(params, sigma=0.0, seed=0, n=801, n_lw=400.0):
    return synthesize_trace(params, linear_grid(params, n, n_lw), NoiseSpec(sigma, seed))


def angles_close(a, b, tol):
    return abs(math.remainder(a - b, 2.0 * math.pi)) < tol


class TestEstimateDelay:
    def test_noiseless_recovery(self):
        # wide span keeps the resonator's 1/(f-f0) phase tail out of the wings
        tr = wide_trace(PAPER)
        assert estimate_delay(tr) == pytest.approx(50e-9, rel=1e-3)

    def test_zero_delay(self):
        # the resonator phase tail biases the wing regression by
        # ~f0/(Qc * span^2); a 2000-linewidth sweep pushes it below 1e-12 s
        p = ResonatorParams(f0=7.955e9, Qi=11900, Qc=12000, theta=-0.16, tau=0.0)
        tr = wide_trace(p, n=2001, n_lw=2000.0)
        assert abs(estimate_delay(tr)) < 1e-12

    def test_noisy_median(self):
        errs = []
        for seed in range(100):
            tr = wide_trace(PAPER, sigma=0.01, seed=seed)
            errs.append(abs(estimate_delay(tr) - 50e-9) / 50e-9)
        assert np.median(errs) < 0.01

    def test_too_few_wing_points(self):
        tr = wide_trace(PAPER, n=8)
        with pytest.raises(ValueError):
            estimate_delay(tr, wing_fraction=0.1)


class TestCircleFit:
    def test_exact_circle(self):
        ang = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        z = (0.3 - 0.7j) + 1.3 * np.exp(1j * ang)
        center, radius = circle_fit(z)
        assert center == pytest.approx(0.3 - 0.7j, abs=1e-10)
        assert radius == pytest.approx(1.3, abs=1e-10)

    def test_semicircle_arc(self):
        ang = np.linspace(-np.pi / 2, np.pi / 2, 60)
        z = (1.0 + 2.0j) + 0.8 * np.exp(1j * ang)
        center, radius = circle_fit(z)
        assert abs(center - (1.0 + 2.0j)) < 1e-6 * 0.8
        assert radius == pytest.approx(0.8, rel=1e-6)

    def test_degenerate_points_rejected(self):
        with pytest.raises(ValueError):
            circle_fit(np.full(20, 0.5 + 0.5j))


class TestInitialGuess:
    def test_within_twenty_percent_noiseless(self):
        tr = synthesize_trace(PAPER, linear_grid(PAPER, 401, 30.0))
        g = initial_guess(tr)
        assert g.f0 == pytest.approx(PAPER.f0, rel=0.2)
        assert g.Qi == pytest.approx(PAPER.Qi, rel=0.2)
        assert g.Qc == pytest.approx(PAPER.Qc, rel=0.2)
        assert g.theta == pytest.approx(PAPER.theta, abs=0.2)
        assert g.B_mag == pytest.approx(PAPER.B_mag, rel=0.2)
        assert g.tau == pytest.approx(PAPER.tau, rel=0.2)

    def test_feeds_fit_converging_quickly(self):
        tr = synthesize_trace(PAPER, linear_grid(PAPER, 401, 30.0))
        res = fit_s11(tr)
        assert res.converged
        assert res.iterations <= 50

    def test_flat_trace_rejected(self):
        f = np.linspace(1e9, 2e9, 64)
        tr = ComplexTrace(f, np.full(64, 0.9 + 0.1j))
        with pytest.raises(ValueError):
            initial_guess(tr)


class TestJacobian:
    def test_analytic_matches_finite_differences(self):
        f = linear_grid(PAPER, 31, 20.0)
        p = np.array([PAPER.f0, math.log(PAPER.Qi), math.log(PAPER.Qc),
                      PAPER.theta, PAPER.B_mag, PAPER.B_phase, PAPER.tau])
        _, grad = _model_and_grad(f, p)
        steps = [1.0, 1e-6, 1e-6, 1e-6, 1e-7, 1e-7, 1e-13]
        for i, h in enumerate(steps):
            def component(v, i=i):
                q = p.copy()
                q[i] = v
                return _model_and_grad(f, q)[0]
            num = (component(p[i] + h) - component(p[i] - h)) / (2 * h)
            scale = np.max(np.abs(grad[i]))
            assert np.max(np.abs(num - grad[i])) < 1e-4 * scale


class TestFitS11:
    def test_noiseless_round_trip_paper_values(self):
        tr = synthesize_trace(PAPER, linear_grid(PAPER, 401, 30.0))
        res = fit_s11(tr)
        p = res.params
        assert res.converged
        assert p.f0 == pytest.approx(PAPER.f0, rel=1e-6)
        assert p.Qi == pytest.approx(PAPER.Qi, rel=1e-6)
        assert p.Qc == pytest.approx(PAPER.Qc, rel=1e-6)
        assert p.theta == pytest.approx(PAPER.theta, rel=1e-6)
        assert p.B_mag == pytest.approx(PAPER.B_mag, rel=1e-6)
        assert angles_close(p.B_phase, PAPER.B_phase, 1e-6)
        assert p.tau == pytest.approx(PAPER.tau, rel=1e-6)

    def test_monte_carlo_qi_accuracy(self):
        errs = []
        grid = linear_grid(PAPER, 201, 30.0)
        for seed in range(100):
            tr = synthesize_trace(PAPER, grid, NoiseSpec(0.005, seed))
            res = fit_s11(tr)
            errs.append(abs(res.params.Qi - PAPER.Qi) / PAPER.Qi)
        assert np.median(errs) < 0.02

    def test_decreasing_sweep_rejected(self):
        f = linear_grid(PAPER, 64)[::-1]
        with pytest.raises(ValueError):
            ComplexTrace(f, s11_model(PAPER, f))

    def test_scaling_invariance(self):
        grid = linear_grid(PAPER, 301, 30.0)
        tr = synthesize_trace(PAPER, grid)
        scale = 0.7 * np.exp(1.1j)
        tr2 = ComplexTrace(grid, tr.samples * scale)
        r1, r2 = fit_s11(tr), fit_s11(tr2)
        for name in ("f0", "Qi", "Qc", "theta"):
            v1, v2 = getattr(r1.params, name), getattr(r2.params, name)
            assert abs(v2 - v1) <= 1e-9 * abs(v1)
        assert r2.params.B_mag == pytest.approx(0.7 * r1.params.B_mag, rel=1e-9)

    def test_residual_never_worse_than_initial_guess(self):
        tr = synthesize_trace(PAPER, linear_grid(PAPER, 201, 30.0), NoiseSpec(0.02, 5))
        init = initial_guess(tr)
        rms0 = float(np.sqrt(np.mean(np.abs(s11_model(init, tr.freqs) - tr.samples) ** 2)))
        res = fit_s11(tr, init=init)
        assert res.residual_rms <= rms0 + 1e-15

    def test_stderr_scales_with_trace_length(self):
        # white noise: parameter uncertainty ~ 1/sqrt(N)
        sigma = 0.01
        errs = {}
        for n in (201, 2010):
            tr = synthesize_trace(PAPER, linear_grid(PAPER, n, 30.0), NoiseSpec(sigma, 1))
            errs[n] = fit_s11(tr).stderr["Qi"]
        ratio = errs[201] / errs[2010]
        assert ratio == pytest.approx(math.sqrt(2010 / 201), rel=0.2)

    def test_non_convergence_is_flag_not_exception(self):
        tr = synthesize_trace(PAPER, linear_grid(PAPER, 201, 30.0), NoiseSpec(0.01, 3))
        res = fit_s11(tr, FitConfig(max_iter=1))
        assert res.converged is False
        assert res.params.f0 > 0

    @given(
        qi=st.floats(min_value=3e3, max_value=3e5),
        qc_ratio=st.floats(min_value=0.3, max_value=3.0),
        theta=st.floats(min_value=-1.0, max_value=1.0),
        bmag=st.floats(min_value=0.2, max_value=2.0),
        tau=st.floats(min_value=0.0, max_value=80e-9),
        n_lw=st.floats(min_value=8.0, max_value=40.0),
    )
    @settings(max_examples=20, deadline=None)
    def test_round_trip_property(self, qi, qc_ratio, theta, bmag, tau, n_lw):
        qc = qi * qc_ratio
        assume(1.0 / qi + math.cos(theta) / qc > 0)
        truth = ResonatorParams(f0=6.0e9, Qi=qi, Qc=qc, theta=theta,
                                B_mag=bmag, B_phase=0.4, tau=tau)
        # keep the dip distinguishable from the baseline
        assume(total_q(truth) / qc > 0.05)
        tr = synthesize_trace(truth, linear_grid(truth, 401, n_lw))
        res = fit_s11(tr)
        assert res.params.Qi == pytest.approx(qi, rel=1e-6)
        assert res.params.Qc == pytest.approx(qc, rel=1e-6)
        assert res.params.f0 == pytest.approx(truth.f0, rel=1e-6)
        assert angles_close(res.params.B_phase, truth.B_phase, 1e-5)


class TestPhaseSlope:
    def test_against_finite_difference(self):
        p = ResonatorParams(f0=7.955e9, Qi=11900, Qc=12000, theta=-0.16)

        def phase(f):
            return float(np.angle(s11_model(p, f)))

        num = central_difference(phase, p.f0, 1.0)
        assert phase_slope_at_resonance(p) == pytest.approx(num, rel=1e-6)

    def test_critically_coupled_closed_form(self):
        p = ResonatorParams(f0=5e9, Qi=2e4, Qc=4e4, theta=0.0)
        q = total_q(p)
        expected = (4.0 * q / p.f0) * (q / p.Qc) / (1.0 - 2.0 * q / p.Qc)
        assert phase_slope_at_resonance(p) == pytest.approx(expected, rel=1e-9)

    def test_doubles_with_q_at_fixed_ratio(self):
        a = ResonatorParams(f0=5e9, Qi=1e4, Qc=3e4, theta=0.0)
        b = ResonatorParams(f0=5e9, Qi=2e4, Qc=6e4, theta=0.0)
        assert phase_slope_at_resonance(b) == pytest.approx(
            2 * phase_slope_at_resonance(a), rel=1e-9
        )

    def test_overcoupled_asymptote(self):
        p = ResonatorParams(f0=5e9, Qi=1e7, Qc=1e4, theta=0.0)
        q = total_q(p)
        assert abs(phase_slope_at_resonance(p)) == pytest.approx(4 * q / p.f0, rel=0.01)
