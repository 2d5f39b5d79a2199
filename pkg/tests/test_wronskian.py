import math

import numpy as np
import pytest

from sads_udw import kernels
from sads_udw.errors import AccuracyError, ConfigurationError
from sads_udw.geometry import make_geometry
from sads_udw.radial import (ModeKey, _ode_scales, build_series,
                             propagate_in_mode, theta0_series,
                             theta0_wronskian, ModeBranch)


class TestWronskianSolver:
    @pytest.mark.parametrize("omega,l", [(0.5, 0), (1.0, 2), (2.0, 4),
                                         (4.0, 1), (10.0, 0)])
    def test_drift_certificate(self, g01, omega, l):
        res = theta0_wronskian(g01, omega, l)
        assert res.wronskian_drift < 1e-8
        assert -math.pi < res.theta0 <= math.pi

    @pytest.mark.parametrize("omega,l", [(0.5, 0), (1.0, 1), (2.0, 3),
                                         (4.0, 2)])
    def test_agreement_with_series(self, g01, omega, l):
        ws = theta0_wronskian(g01, omega, l)
        ss = theta0_series(g01, omega, l)
        assert abs(ws.theta0 - ss.theta0) < 1e-6

    def test_wronskian_constant_between_independent_solutions(self, g01):
        # in-mode and its conjugate (the out-mode) propagated the same way:
        # their Wronskian is 2 i omega exactly at the horizon and must stay
        # put along the whole integration
        omega, l = 1.5, 1
        branch, seed, rs_seed, rs_bound = propagate_in_mode(g01, omega, l)
        vl = float(l * (l + 1))
        x_seed = branch.xs[0]
        y0 = np.conj(branch.ys[0])
        p0 = np.conj(branch.ps[0])
        max_step, first_step = _ode_scales(g01, omega, vl)
        out = kernels.integrate_radial(g01.r0, vl, omega, y0, p0, x_seed,
                                       rs_seed, rs_bound, rtol=1e-11,
                                       atol=1e-13, max_step=max_step,
                                       first_step=first_step)
        conj_branch = ModeBranch(*out, g01.r0, vl, omega)
        ts = np.linspace(rs_seed, rs_bound, 60)
        w = (branch.y_at(ts) * conj_branch.p_at(ts)
             - branch.p_at(ts) * conj_branch.y_at(ts))
        w0 = np.mean(w)
        assert np.max(np.abs(w - w0)) / abs(w0) < 1e-8

    def test_accuracy_error_on_impossible_drift(self, g01):
        with pytest.raises(AccuracyError):
            theta0_wronskian(g01, 1.0, 0, drift_tol=1e-16)

    def test_empty_overlap_is_configuration_error(self, g01):
        # boundary cut between the horizon and the seed radius
        eta = 1.0 / (g01.r_plus * (1.0 + 5e-7))
        with pytest.raises(ConfigurationError):
            theta0_wronskian(g01, 1.0, 0, boundary_eta=eta)

    def test_lowest_resonance_approaches_ads_normal_mode(self):
        # r_plus -> 0 regression: the l = 0 ground resonance (minimum of the
        # boundary amplitude |psi_in(0)|) sits near omega R = 2
        g = make_geometry(0.002)

        def amp(omega):
            return theta0_wronskian(g, omega, 0).boundary_amplitude

        omegas = np.linspace(1.9, 2.1, 21)
        amps = [amp(om) for om in omegas]
        i = int(np.argmin(amps))
        lo, hi = omegas[max(i - 1, 0)], omegas[min(i + 1, len(omegas) - 1)]
        for _ in range(40):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if amp(m1) < amp(m2):
                hi = m2
            else:
                lo = m1
        omega_res = 0.5 * (lo + hi)
        assert abs(omega_res - 2.0) < 0.02
