import math

import numpy as np
import pytest

from sads_udw.analysis import (ads_normal_mode, peak_coefficient,
                               peak_vs_rplus, scan_peaks, wkb_scatter)
from sads_udw.errors import (DomainError, InsufficientDataError,
                             OutOfRegimeError)
from sads_udw.geometry import make_geometry
from sads_udw.response import DetectorSpec, sum_l


@pytest.fixture(scope="module")
def g001():
    return make_geometry(0.01)


@pytest.fixture(scope="module")
def first_peak_curve(g001, shared_cache):
    """The l = 0 static contribution around its first resonance."""
    t_h = g001.hawking_temperature
    u = np.linspace(1.2 / t_h, 3.4 / t_h, 140)
    spec = DetectorSpec("static", 0.1, "hartle_hawking", l_max=0)
    return sum_l(g001, spec, u, cache=shared_cache)


class TestPeakCoefficient:
    def test_examples(self):
        assert peak_coefficient(0.0, 1.0) == pytest.approx(1.0)
        assert peak_coefficient(-0.8, 0.6) == pytest.approx(3.0)
        assert peak_coefficient(0.8, 0.6) == pytest.approx(1.0 / 3.0)

    def test_infinite_peak_signal(self):
        assert peak_coefficient(-1.0, 0.1) == math.inf

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            peak_coefficient(math.nan, 1.0)


class TestAdsNormalModes:
    def test_tower(self):
        assert ads_normal_mode(0, 0) == 2.0
        assert ads_normal_mode(1, 0) == 3.0
        assert ads_normal_mode(0, 1) == 4.0

    def test_domain(self):
        with pytest.raises(DomainError):
            ads_normal_mode(-1, 0)


class TestWkbScatter:
    def test_out_of_regime(self, g001):
        with pytest.raises(OutOfRegimeError):
            wkb_scatter(g001, 1.0, 3)

    def test_flux_conservation_acceptance_point(self, g001):
        sc = wkb_scatter(g001, 20.0, 0)
        assert sc.flux_defect < 1e-3
        assert sc.matching_residual < 1e-6

    def test_validity_matches_boundary_asymptote(self, g001):
        sc = wkb_scatter(g001, 20.0, 0)
        asym = g001.r0 / (2.0 * sc.omega_prime ** 3)
        assert 0.5 < sc.wkb_validity / asym < 2.0

    def test_peakiness_dies_at_high_frequency(self, g001):
        abs_a = []
        cs = []
        for omega in (20.0, 60.0, 140.0):
            sc = wkb_scatter(g001, omega, 0)
            abs_a.append(abs(sc.a_refl))
            cs.append(sc.c)
        assert abs_a[0] > abs_a[1] > abs_a[2]
        assert abs(cs[-1] - 1.0) < 0.01

    def test_c_extrema_sit_at_real_axis_crossings(self, g001):
        # local maxima of C(omega) pin the phase of A to pi very tightly
        # (C varies like 1/|A+1|^2 there); minima are shallow and get
        # displaced by the secular drift of |B|(omega), so only a loose
        # bound is meaningful for them
        omegas = np.linspace(18.0, 26.0, 33)
        cs = np.array([wkb_scatter(g001, om, 0).c for om in omegas])
        checked_max = checked_min = 0
        for i in range(1, len(omegas) - 1):
            is_max = cs[i] > cs[i - 1] and cs[i] > cs[i + 1]
            is_min = cs[i] < cs[i - 1] and cs[i] < cs[i + 1]
            if not (is_max or is_min):
                continue
            lo, hi = omegas[i - 1], omegas[i + 1]
            for _ in range(45):
                m1 = lo + (hi - lo) / 3
                m2 = hi - (hi - lo) / 3
                c1 = wkb_scatter(g001, m1, 0).c
                c2 = wkb_scatter(g001, m2, 0).c
                if (c1 > c2) == is_max:
                    hi = m2
                else:
                    lo = m1
            om_star = 0.5 * (lo + hi)
            phase = abs(np.angle(wkb_scatter(g001, om_star, 0).a_refl))
            if is_max:
                assert abs(phase - math.pi) < 1e-2
                checked_max += 1
            else:
                assert phase < 0.15
                checked_min += 1
        assert checked_max >= 2 and checked_min >= 2

    def test_omega_prime_definition(self, g001):
        sc = wkb_scatter(g001, 5.0, 2)
        assert sc.omega_prime == pytest.approx(math.sqrt(25.0 - 6.0),
                                               rel=1e-15)


class TestScanPeaks:
    def test_first_peak_near_ads_mode(self, first_peak_curve):
        peaks = scan_peaks(first_peak_curve, 0, refine_rel=1e-10)
        assert peaks
        assert peaks[0].omega_tilde_r == pytest.approx(2.0, abs=0.1)
        assert peaks[0].n == 0
        assert peaks[0].half_width > 0.0

    def test_record_conversion_identity(self, first_peak_curve):
        peaks = scan_peaks(first_peak_curve, 0, refine_rel=1e-10)
        t_h = first_peak_curve.hawking_temperature
        for p in peaks:
            assert p.omega_tilde_r == pytest.approx(t_h * p.e_over_tloc,
                                                    rel=1e-12)

    def test_peak_coincides_with_c_maximum(self, g001, first_peak_curve):
        # the rate resonance and the scattering-coefficient maximum agree
        peaks = scan_peaks(first_peak_curve, 0, refine_rel=1e-10)
        omega_peak = peaks[0].omega_tilde_r
        lo, hi = omega_peak - 0.02, omega_peak + 0.02
        for _ in range(50):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if wkb_scatter(g001, m1, 0).c > wkb_scatter(g001, m2, 0).c:
                hi = m2
            else:
                lo = m1
        omega_c = 0.5 * (lo + hi)
        half_width_omega = max(peaks[0].half_width
                               * first_peak_curve.hawking_temperature, 1e-6)
        assert abs(omega_c - omega_peak) < 3 * half_width_omega

    def test_peak_ordering_in_l(self, g001, shared_cache):
        # for fixed n = 0 the peak frequency rises with l
        t_h = g001.hawking_temperature
        found = []
        for l in (0, 1, 2):
            center = ads_normal_mode(l, 0)
            u = np.linspace((center - 0.7) / t_h, (center + 0.7) / t_h, 80)
            spec = DetectorSpec("static", 0.1, "hartle_hawking", l_max=l)
            curve = sum_l(g001, spec, u, cache=shared_cache)
            peaks = scan_peaks(curve, l, refine_rel=1e-8,
                               compute_widths=False)
            assert peaks, l
            found.append(peaks[0].omega_tilde_r)
        assert found[0] < found[1] < found[2]

    def test_no_peaks_is_empty_list(self, g01, shared_cache):
        # large horizon: exponential decay swamps any resonance bump
        spec = DetectorSpec("static", 10.0, "hartle_hawking", l_max=0)
        g1 = make_geometry(1.0)
        u = np.linspace(15.0, 25.0, 60)
        curve = sum_l(g1, spec, u, cache=shared_cache)
        assert scan_peaks(curve, 0, compute_widths=False) == []

    def test_requires_static_curve(self, g01, shared_cache):
        spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=0)
        curve = sum_l(g01, spec, np.array([0.4, 0.5, 0.6]),
                      cache=shared_cache)
        with pytest.raises(DomainError):
            scan_peaks(curve, 0)


class TestPeakVsRplus:
    def test_quadratic_fit_intercept(self, shared_cache):
        fit = peak_vs_rplus(0, 0, [0.002, 0.005, 0.01, 0.02, 0.05], 10.0,
                            cache=shared_cache)
        assert fit.c0 == pytest.approx(2.0, abs=0.04)
        assert not fit.flagged

    def test_residual_growth_with_largest_sample(self, shared_cache):
        full = peak_vs_rplus(0, 0, [0.002, 0.005, 0.01, 0.02, 0.05], 10.0,
                             cache=shared_cache)
        trimmed = peak_vs_rplus(0, 0, [0.002, 0.005, 0.01, 0.02], 10.0,
                                cache=shared_cache)
        assert full.residual_norm > trimmed.residual_norm > 0.0
        assert full.residual_norm > 2.0 * trimmed.residual_norm

    def test_larger_sample_deflects_above_small_fit(self, shared_cache):
        trimmed = peak_vs_rplus(0, 0, [0.002, 0.005, 0.01, 0.02], 10.0,
                                cache=shared_cache)
        full = peak_vs_rplus(0, 0, [0.002, 0.005, 0.01, 0.02, 0.05], 10.0,
                             cache=shared_cache)
        rp = 0.05
        predicted = trimmed.c0 + trimmed.c1 * rp + trimmed.c2 * rp * rp
        actual = full.omega_tilde[full.r_plus.index(rp)]
        assert actual > predicted

    def test_insufficient_data(self, shared_cache):
        with pytest.raises(InsufficientDataError):
            peak_vs_rplus(0, 7, [0.002, 0.005, 0.01, 0.02], 10.0,
                          cache=shared_cache)
