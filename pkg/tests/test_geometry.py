import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sads_udw.errors import DomainError, NoCircularOrbitError
from sads_udw.geometry import (circular_kinematics, lapse, local_temperature,
                               make_geometry, pure_ads_geometry,
                               r_plus_from_r0, rescale, tortoise)


def simpson_tortoise(g, r, panels=1_000_000):
    """Independent oracle: composite Simpson on -int_0^{1/r} dx / (1+x^2-r0 x^3)."""
    x = np.linspace(0.0, 1.0 / r, 2 * panels + 1)
    f = 1.0 / (1.0 + x * x - g.r0 * x ** 3)
    h = x[1] - x[0]
    weights = np.ones_like(x)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return -h / 3.0 * float(np.dot(weights, f))


class TestConstruction:
    def test_r0_closed_form(self):
        assert make_geometry(0.1).r0 == pytest.approx(0.101, abs=1e-15)

    def test_hawking_temperature_small_hole(self):
        # 3 significant figures for r_plus = 0.01
        assert make_geometry(0.01).hawking_temperature == pytest.approx(7.96, abs=0.005)

    def test_hawking_temperature_unit_hole(self):
        assert make_geometry(1.0).hawking_temperature == pytest.approx(1.0 / math.pi, rel=1e-15)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(DomainError):
            make_geometry(bad)

    @pytest.mark.parametrize("r_plus", [0.002, 0.01, 0.1, 1.0, 5.0])
    def test_horizon_root(self, r_plus):
        g = make_geometry(r_plus)
        assert abs(g.lapse(g.r_plus)) < 1e-12

    @pytest.mark.parametrize("r0", [0.01, 0.101, 2.0, 130.0])
    def test_r_plus_inversion(self, r0):
        rp = r_plus_from_r0(r0)
        assert rp * (rp * rp + 1.0) == pytest.approx(r0, rel=1e-14)


class TestLapse:
    def test_values(self, g01):
        assert lapse(g01, 1.0) == pytest.approx(1.899, rel=1e-15)
        g2 = make_geometry(1.0)
        assert lapse(g2, 2.0) == pytest.approx(4.0, rel=1e-15)

    def test_requires_positive_radius(self, g01):
        with pytest.raises(DomainError):
            lapse(g01, 0.0)


class TestTortoise:
    def test_pure_ads_closed_form(self):
        ads = pure_ads_geometry()
        assert tortoise(ads, 1.0) == pytest.approx(math.atan(1.0) - math.pi / 2,
                                                   rel=1e-12)
        assert tortoise(ads, 3.7) == pytest.approx(math.atan(3.7) - math.pi / 2,
                                                   rel=1e-12)

    def test_vanishes_at_infinity(self, g01):
        assert abs(tortoise(g01, 1e9)) < 2e-9

    @pytest.mark.parametrize("r", [0.12, 0.15, 0.3, 1.0, 10.0])
    def test_against_composite_simpson(self, g01, r):
        # adaptive quadrature vs a 10^6-panel composite rule
        assert tortoise(g01, r) == pytest.approx(simpson_tortoise(g01, r),
                                                 rel=1e-10)

    def test_negative_and_monotone(self, g01):
        rr = np.array([0.1001, 0.102, 0.13, 0.32, 1.4, 8.0, 900.0])
        vals = tortoise(g01, rr)
        assert np.all(vals < 0.0)
        assert np.all(np.diff(vals) > 0.0)

    def test_near_horizon_log_law(self, g01):
        k = 4.0 * math.pi * g01.hawking_temperature
        consts = [tortoise(g01, g01.r_plus + d) - math.log(d) / k
                  for d in (1e-3, 1e-4, 1e-5)]
        assert abs(consts[1] - consts[2]) < abs(consts[0] - consts[1])
        assert abs(consts[1] - consts[2]) < 2e-4

    def test_domain_error_inside_horizon(self, g01):
        with pytest.raises(DomainError):
            tortoise(g01, g01.r_plus)


class TestCircularKinematics:
    def test_closed_forms(self, g01):
        kin = circular_kinematics(g01, 1.0)
        assert kin.a == pytest.approx(math.sqrt(2.0 / 1.697), rel=1e-14)
        assert kin.b == pytest.approx(math.sqrt(2.101 / 1.697), rel=1e-14)
        assert kin.a > 1.0

    def test_no_orbit_error(self, g01):
        with pytest.raises(NoCircularOrbitError):
            circular_kinematics(g01, 1.4 * g01.r0)

    def test_normalization_100_random_orbits(self, rng):
        # orbits parametrized by the relative margin u above the threshold
        # 2r = 3 r0: there a^2 = (1+u)/u, so keeping u >= 0.1 (and radii a
        # few AdS lengths) the identity's summands stay small enough for an
        # absolute 1e-12 check to be meaningful in doubles
        for _ in range(100):
            g = make_geometry(float(rng.uniform(0.01, 1.2)))
            u = float(10.0 ** rng.uniform(-1, 0.5))
            r = 1.5 * g.r0 * (1.0 + u)
            kin = circular_kinematics(g, r)
            norm = -g.lapse(r) * kin.a ** 2 + r * r * kin.b ** 2
            assert norm == pytest.approx(-1.0, abs=1e-12)

    @given(r_plus=st.floats(0.01, 1.2), u=st.floats(0.1, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_normalization_property(self, r_plus, u):
        g = make_geometry(r_plus)
        r = 1.5 * g.r0 * (1.0 + u)
        kin = circular_kinematics(g, r)
        assert -g.lapse(r) * kin.a ** 2 + r * r * kin.b ** 2 == pytest.approx(
            -1.0, abs=1e-12)


class TestLocalTemperature:
    def test_closed_chain(self, g01):
        expect = g01.hawking_temperature / math.sqrt(g01.lapse(1.0))
        assert local_temperature(g01, 1.0) == pytest.approx(expect, rel=1e-15)
        assert expect == pytest.approx(0.5948, abs=2e-4)

    def test_far_field_falls_like_inverse_radius(self, g01):
        t1 = local_temperature(g01, 1e5)
        t2 = local_temperature(g01, 2e5)
        assert t1 / t2 == pytest.approx(2.0, rel=1e-9)
        assert t1 == pytest.approx(g01.hawking_temperature / 1e5, rel=1e-9)

    def test_diverges_at_horizon(self, g01):
        assert local_temperature(g01, g01.r_plus * (1 + 1e-12)) > 1e4
        with pytest.raises(DomainError):
            local_temperature(g01, g01.r_plus)


class TestRescale:
    def test_identity(self, g01):
        rep = rescale(g01, 1.0)
        assert rep.r_plus == g01.r_plus
        assert rep.hawking_temperature == pytest.approx(
            g01.hawking_temperature, rel=1e-15)

    def test_temperature_inverse_scaling(self, g01):
        rep = rescale(g01, 2.5)
        assert rep.hawking_temperature * 2.5 == pytest.approx(
            g01.hawking_temperature, rel=1e-14)

    def test_rate_times_length_invariant(self, g01):
        # F_dot r_plus is unchanged: both map with inverse factors
        rate, sigma = 0.1234, 7.0
        rep = rescale(g01, sigma)
        assert float(rep.map_rate(rate)) * rep.r_plus == pytest.approx(
            rate * g01.r_plus, rel=1e-15)

    @pytest.mark.parametrize("sigma", [0.5, 2.0, 10.0])
    def test_dimensionless_combinations(self, g01, sigma):
        r, energy = 1.3, 0.77
        f = g01.lapse(r)
        omega_t = math.sqrt(f) * energy
        e_over_tloc = energy / local_temperature(g01, r)
        rep = rescale(g01, sigma)
        r_s = float(rep.map_length(r))
        e_s = float(rep.map_energy(energy))
        f_s = float(rep.lapse(r_s))
        omega_t_s = math.sqrt(f_s) * e_s
        assert f_s == pytest.approx(f, rel=1e-12)
        assert r_s / rep.r_plus == pytest.approx(r / g01.r_plus, rel=1e-12)
        assert omega_t_s * rep.ads_radius == pytest.approx(omega_t, rel=1e-12)
        assert e_s / float(rep.local_temperature(r_s)) == pytest.approx(
            e_over_tloc, rel=1e-12)

    def test_rejects_bad_sigma(self, g01):
        with pytest.raises(DomainError):
            rescale(g01, -1.0)
