import json
import math
from pathlib import Path

import numpy as np
import pytest

from scanres.special import EULER_GAMMA, bessel_k0, re_digamma_half_plus_imag

from oracles import k0_series_oracle, re_digamma_series_oracle

FROZEN = json.loads((Path(__file__).parent / "data" / "special_oracle.json").read_text())


class TestBesselK0:
    def test_against_live_series_oracle(self):
        # brute-force power series in 60-digit arithmetic, 50-point log grid
        xs = np.logspace(-3, np.log10(30.0), 50)
        vals = bessel_k0(xs)
        for x, v in zip(xs, vals):
            ref = k0_series_oracle(x)
            assert abs(v - ref) <= 1e-8 * abs(ref)

    def test_against_frozen_oracle_table(self):
        xs = np.array(FROZEN["k0"]["x"])
        refs = np.array(FROZEN["k0"]["value"])
        vals = bessel_k0(xs)
        assert np.max(np.abs(vals - refs) / np.abs(refs)) < 1e-9

    def test_known_value_at_one(self):
        assert bessel_k0(1.0) == pytest.approx(0.4210244382, rel=1e-9)

    def test_small_x_log_asymptote(self):
        x = 1e-6
        ref = -math.log(x / 2.0) - EULER_GAMMA
        assert bessel_k0(x) == pytest.approx(ref, rel=1e-6)

    def test_strictly_decreasing(self):
        xs = np.logspace(-3, 1.6, 300)
        assert np.all(np.diff(bessel_k0(xs)) < 0)

    def test_branch_joints_are_continuous(self):
        # series/quadrature at 2, quadrature/asymptotic at 12
        for x in (2.0, 12.0):
            below = bessel_k0(x * (1 - 1e-9))
            above = bessel_k0(x * (1 + 1e-9))
            assert below == pytest.approx(above, rel=1e-7)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            bessel_k0(bad)


class TestReDigamma:
    def test_against_frozen_oracle_table(self):
        ys = np.array(FROZEN["re_digamma_half_plus_i"]["y"])
        refs = np.array(FROZEN["re_digamma_half_plus_i"]["value"])
        vals = re_digamma_half_plus_imag(ys)
        assert np.max(np.abs(vals - refs) / np.abs(refs)) < 1e-9

    def test_against_live_series_oracle(self):
        for y in (1e-3, 0.3, 1.0, 7.7, 42.0):
            ref = re_digamma_series_oracle(y)
            assert re_digamma_half_plus_imag(y) == pytest.approx(ref, rel=1e-8)

    def test_value_at_zero(self):
        # psi(1/2) = -gamma - 2 ln 2
        ref = -EULER_GAMMA - 2.0 * math.log(2.0)
        assert re_digamma_half_plus_imag(0.0) == pytest.approx(ref, rel=1e-10)
        assert re_digamma_half_plus_imag(0.0) == pytest.approx(-1.9635100260, rel=1e-9)

    def test_even_in_y_exactly(self):
        for y in (0.1, 1.0, 12.0, 300.0):
            assert re_digamma_half_plus_imag(y) == re_digamma_half_plus_imag(-y)

    def test_large_y_log_asymptote(self):
        y = 10.0
        assert re_digamma_half_plus_imag(y) == pytest.approx(math.log(y), rel=2e-3)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            re_digamma_half_plus_imag(math.inf)
