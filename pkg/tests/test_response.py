import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scanres.quantities import CONSTANTS, dbm_to_watts
from scanres.response import (
    ComplexTrace,
    NoiseSpec,
    ResonatorParams,
    average_photon_number,
    linear_grid,
    s11_model,
    synthesize_trace,
    total_q,
)

PAPER = dict(f0=7.955e9, Qi=11900.0, Qc=12000.0, theta=-0.16)


class TestTotalQ:
    def test_equal_parallel_combination(self):
        p = ResonatorParams(f0=7.955e9, Qi=11900, Qc=11900, theta=0.0)
        assert total_q(p) == pytest.approx(5950.0, rel=1e-12)

    def test_undercoupled_limit(self):
        p = ResonatorParams(f0=7.955e9, Qi=11900, Qc=1e12, theta=0.0)
        assert total_q(p) == pytest.approx(11900.0, rel=1e-6)

    def test_formula_with_asymmetry(self):
        p = ResonatorParams(**PAPER)
        expected = 1.0 / (1.0 / 11900 + math.cos(-0.16) / 12000)
        assert total_q(p) == pytest.approx(expected, rel=1e-12)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            ResonatorParams(f0=-1.0, Qi=1e4, Qc=1e4)
        with pytest.raises(ValueError):
            ResonatorParams(f0=1e9, Qi=1e4, Qc=1e4, theta=2.0)


class TestS11Model:
    def test_critical_coupling_dips_to_origin(self):
        p = ResonatorParams(f0=5e9, Qi=2e4, Qc=2e4, theta=0.0)
        # Qi = Qc, theta = 0: S11(f0) = 1 - 2 Q/Qc = 0
        assert abs(s11_model(p, 5e9)) < 1e-12

    def test_off_resonant_magnitude_approaches_one(self):
        p = ResonatorParams(f0=5e9, Qi=2e4, Qc=2e4, theta=0.0)
        far = 5e9 * (1 + 2000.0 / total_q(p))
        assert abs(s11_model(p, far)) == pytest.approx(1.0, abs=1e-3)

    def test_paper_params_closed_form(self):
        p = ResonatorParams(**PAPER)
        q = total_q(p)
        # independent evaluation of the closed form at f = f0
        expected = 1.0 - 2.0 * (q / p.Qc) * np.exp(1j * p.theta)
        assert s11_model(p, p.f0) == pytest.approx(expected, rel=1e-12)

    def test_locus_is_a_circle(self):
        p = ResonatorParams(**PAPER)
        freqs = linear_grid(p, 2001, 40.0)
        z = s11_model(p, freqs)
        q = total_q(p)
        center = 1.0 - (q / p.Qc) * np.exp(1j * p.theta)
        radius = q / p.Qc
        assert np.max(np.abs(np.abs(z - center) - radius)) < 1e-9 * radius

    def test_phase_winds_monotonically(self):
        p = ResonatorParams(**PAPER, B_mag=0.9, B_phase=0.3, tau=50e-9)
        freqs = linear_grid(p, 801, 12.0)
        env = p.B_mag * np.exp(1j * p.B_phase) * np.exp(1j * p.tau * freqs)
        w = 1.0 - s11_model(p, freqs) / env
        phase = np.unwrap(np.angle(w))
        diffs = np.diff(phase)
        assert np.all(diffs < 0) or np.all(diffs > 0)


class TestPhotonNumber:
    def test_linearity_in_power(self):
        base = average_photon_number(5975, 12000, 7.955e9, 1e-17)
        assert average_photon_number(5975, 12000, 7.955e9, 2e-17) == pytest.approx(
            2 * base, rel=1e-12
        )

    def test_paper_single_photon_claim(self):
        nbar = average_photon_number(5975, 12000, 7.955e9, dbm_to_watts(-141))
        # 2 Q^2 P / (pi Qc h f0^2), evaluated independently
        expected = 2 * 5975**2 * dbm_to_watts(-141) / (
            math.pi * 12000 * CONSTANTS.h * 7.955e9**2
        )
        assert nbar == pytest.approx(expected, rel=1e-12)
        assert nbar < 1.0
        assert nbar == pytest.approx(0.36, abs=0.01)

    def test_vanishes_with_q(self):
        assert average_photon_number(1e-9, 12000, 7.955e9, 1e-15) < 1e-20

    @given(st.floats(min_value=0.1, max_value=10.0))
    @settings(max_examples=25, deadline=None)
    def test_homogeneous_in_q_scaling(self, lam):
        base = average_photon_number(5975, 12000, 7.955e9, 1e-17)
        scaled = average_photon_number(lam * 5975, lam * 12000, 7.955e9, 1e-17)
        assert scaled == pytest.approx(lam * base, rel=1e-9)


class TestSynthesizeTrace:
    def test_noiseless_equals_model(self):
        p = ResonatorParams(**PAPER)
        freqs = linear_grid(p, 101)
        tr = synthesize_trace(p, freqs, NoiseSpec(0.0, 0))
        assert np.array_equal(tr.samples, s11_model(p, freqs))

    def test_seed_determinism(self):
        p = ResonatorParams(**PAPER)
        freqs = linear_grid(p, 101)
        a = synthesize_trace(p, freqs, NoiseSpec(0.01, 42))
        b = synthesize_trace(p, freqs, NoiseSpec(0.01, 42))
        assert np.array_equal(a.samples, b.samples)
        c = synthesize_trace(p, freqs, NoiseSpec(0.01, 43))
        assert not np.array_equal(a.samples, c.samples)

    def test_noise_amplitude_monte_carlo(self):
        p = ResonatorParams(**PAPER)
        freqs = linear_grid(p, 101)
        model = s11_model(p, freqs)
        sigma = 0.01
        reals = np.empty((10_000, freqs.size))
        imags = np.empty_like(reals)
        for seed in range(reals.shape[0]):
            tr = synthesize_trace(p, freqs, NoiseSpec(sigma, seed))
            reals[seed] = tr.samples.real - model.real
            imags[seed] = tr.samples.imag - model.imag
        for quad in (reals, imags):
            per_point_std = quad.std(axis=0)
            assert np.all(np.abs(per_point_std - sigma) < 0.05 * sigma)

    def test_empty_grid_rejected(self):
        p = ResonatorParams(**PAPER)
        with pytest.raises(ValueError):
            synthesize_trace(p, np.array([]), NoiseSpec(0.0, 0))


class TestComplexTrace:
    def test_decreasing_frequencies_rejected(self):
        f = np.linspace(2e9, 1e9, 16)
        with pytest.raises(ValueError):
            ComplexTrace(f, np.ones(16, complex))

    def test_too_short_rejected(self):
        f = np.linspace(1e9, 2e9, 7)
        with pytest.raises(ValueError):
            ComplexTrace(f, np.ones(7, complex))

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            ComplexTrace(np.linspace(1e9, 2e9, 10), np.ones(9, complex))
