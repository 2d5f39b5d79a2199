import math

import numpy as np
import pytest

from sads_udw.errors import IntegrableEndpointError
from sads_udw.geometry import circular_kinematics, local_temperature
from sads_udw.modecache import ModeCache
from sads_udw.response import (DetectorSpec, circular_rate_boulware,
                               circular_rate_hh, sum_l, POINT_SHIFTED)


@pytest.fixture(scope="module")
def kin(g01):
    return circular_kinematics(g01, 1.0)


def per_l(pieces, l):
    return sum(v for (ll, _), v in pieces.items() if ll == l)


class TestCircularRates:
    def test_m_parity(self, g01, shared_cache):
        spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=3)
        pieces = circular_rate_hh(g01, spec, 0.63, cache=shared_cache)
        for (l, m) in pieces:
            assert (l + m) % 2 == 0

    def test_nonnegative(self, g01, shared_cache):
        spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=3)
        for energy in (-2.1, -0.3, 0.4, 1.9):
            pieces = circular_rate_hh(g01, spec, energy, cache=shared_cache)
            assert all(v >= 0.0 for v in pieces.values())

    def test_boulware_limits_per_l(self, g01, kin, shared_cache):
        # each l dies at exactly E = l b (largest omega_- crosses zero)
        spec = DetectorSpec("circular", 1.0, "boulware", l_max=3)
        for l in range(4):
            above = circular_rate_boulware(g01, spec, l * kin.b + 0.05,
                                           l_values=[l], cache=shared_cache)
            assert per_l(above, l) == 0.0
            below = circular_rate_boulware(g01, spec, l * kin.b - 0.05,
                                           l_values=[l], cache=shared_cache)
            assert per_l(below, l) > 0.0

    def test_boulware_nonzero_for_positive_gap(self, g01, shared_cache):
        # unlike the static case: circular motion populates E > 0
        spec = DetectorSpec("circular", 1.0, "boulware", l_max=3)
        pieces = circular_rate_boulware(g01, spec, 0.8, cache=shared_cache)
        assert sum(pieces.values()) > 0.0

    def test_step_at_zero_is_l0_only(self, g01, kin, shared_cache):
        spec = DetectorSpec("circular", 1.0, "boulware", l_max=2)
        eps = 1e-3 * kin.b
        below = circular_rate_boulware(g01, spec, -eps, cache=shared_cache)
        above = circular_rate_boulware(g01, spec, +eps, cache=shared_cache)
        assert per_l(below, 0) > 0.0 and per_l(above, 0) == 0.0
        for l in (1, 2):
            assert per_l(below, l) > 0.0 and per_l(above, l) > 0.0

    def test_endpoint_raises(self, g01, kin, shared_cache):
        spec = DetectorSpec("circular", 1.0, "boulware", l_max=2)
        with pytest.raises(IntegrableEndpointError):
            circular_rate_boulware(g01, spec, 2.0 * kin.b,
                                   cache=shared_cache)

    def test_smallest_positive_omega_minus_dominates(self, g01, kin,
                                                     shared_cache):
        # mechanism behind the rightward march of the per-l curves: at
        # positive E the leading piece of each l is the m whose omega_- is
        # the smallest positive one, and that m needs l >= m
        spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=3)
        energy = 1.5
        pieces = circular_rate_hh(g01, spec, energy, cache=shared_cache)
        for l in (2, 3):
            sub = {m: v for (ll, m), v in pieces.items() if ll == l}
            best = max(sub, key=sub.get)
            open_ms = [m for m in sub if (m * kin.b - energy) > 0.0]
            expect = min(open_ms,
                         key=lambda m: (m * kin.b - energy) / kin.a)
            assert best == expect

    def test_shifted_rightward_of_static(self, g01, shared_cache):
        # asymmetric about E = 0 with extra weight at positive gaps: the
        # excitation-to-deexcitation ratio beats the static one throughout
        t_loc = local_temperature(g01, 1.0)
        for energy in (0.75, 1.5, 2.25):
            grid = np.array([-energy, energy])
            circ = sum_l(g01, DetectorSpec("circular", 1.0, "hartle_hawking",
                                           l_max=4), grid,
                         cache=shared_cache)
            stat = sum_l(g01, DetectorSpec("static", 1.0, "hartle_hawking",
                                           l_max=4), grid / t_loc,
                         cache=shared_cache)
            ratio_c = circ.total[1] / circ.total[0]
            ratio_s = stat.total[1] / stat.total[0]
            assert ratio_c > ratio_s
            assert ratio_c < 1.0  # still net de-exciting

    def test_mode_count_scales_like_l(self, g01):
        # distinct mode solves for a single l grow linearly with l, so the
        # cumulative count over l <= L grows like L^2
        def misses_for(l):
            cache = ModeCache()
            spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=l)
            circular_rate_hh(g01, spec, 0.37, l_values=[l], cache=cache)
            return cache.stats()["misses"]

        m6, m12 = misses_for(6), misses_for(12)
        assert m6 >= 4
        assert 1.6 < m12 / m6 < 2.5

    def test_sum_l_shifts_endpoint_grid_points(self, g01, kin, shared_cache):
        spec = DetectorSpec("circular", 1.0, "boulware", l_max=2)
        energies = np.array([0.5, 1.0 * kin.b, 1.5])
        curve = sum_l(g01, spec, energies, cache=shared_cache)
        assert curve.point_flags[1] == POINT_SHIFTED
        assert curve.energies[1] != kin.b
        assert np.all(np.isfinite(curve.total))
