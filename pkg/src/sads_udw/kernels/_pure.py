"""Pure numpy/scipy implementations of the hot kernels.

Same contracts as the compiled extension ``_core``; selected automatically
when the extension is unavailable or when ``SADS_UDW_PURE`` is set.  Both
backends are exception-free at this layer and report failures through status
codes so the selection shim can raise uniformly.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

NAME = "pure"

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_TOO_MANY_STEPS = 2


def frobenius_scaled(s_tab, t_tab, u_tab, n_max):
    """Scaled five-term Frobenius recurrence about the horizon.

    ``s_tab/t_tab/u_tab`` are length-5 complex arrays: entry 0 holds the raw
    Taylor coefficient at the expansion point, entries j=1..4 hold the Taylor
    coefficients premultiplied by (-x_+)^j.  The returned b_n equal
    a_n (-x_+)^n, so partial sums of b_n evaluate the series at x = 0.

    The recurrence itself runs in extended precision: rounding errors excite
    spurious slowly-decaying recurrence modes that otherwise drown the
    geometric tail of the true coefficients after a few thousand terms.

    Returns (b, bad_n); bad_n >= 0 flags a vanishing indicial factor P_n.
    """
    b = np.zeros(n_max + 1, dtype=np.clongdouble)
    b[0] = 1.0
    st = np.asarray(s_tab, dtype=np.clongdouble)
    tt = np.asarray(t_tab, dtype=np.clongdouble)
    ut = np.asarray(u_tab, dtype=np.clongdouble)
    s0 = st[0]
    t0 = tt[0]
    for n in range(1, n_max + 1):
        p_n = n * (n - 1) * s0 + n * t0
        if p_n == 0.0:
            return b.astype(np.complex128), n
        acc = np.clongdouble(0.0)
        for j in range(1, min(4, n) + 1):
            k = n - j
            acc = acc + (k * (k - 1) * st[j] + k * tt[j] + ut[j]) * b[k]
        b[n] = -acc / p_n
    return b.astype(np.complex128), -1


def integrate_radial(r0, vl, omega, y0, p0, x0, t0, t1,
                     rtol, atol, max_step, first_step):
    """Propagate the radial Schrodinger system in the tortoise coordinate.

    State is (y, y', x) with y complex:

        y'' = (Vt(x) - omega^2) y,      x' = -(1 + x^2 - r0 x^3),
        Vt(x) = (1 + x^2 - r0 x^3) (l(l+1) + r0 x).

    Returns (ts, ys, ps, xs, status) with the solver's accepted steps.
    """
    omega2 = omega * omega

    def rhs(t, u):
        yr, yi, pr, pi, x = u
        gg = 1.0 + x * x - r0 * x ** 3
        w = gg * (vl + r0 * x) - omega2
        return (pr, pi, w * yr, w * yi, -gg)

    kwargs = {}
    if first_step is not None and first_step > 0.0:
        kwargs["first_step"] = min(first_step, abs(t1 - t0))
    sol = solve_ivp(rhs, (t0, t1),
                    [y0.real, y0.imag, p0.real, p0.imag, x0],
                    method="DOP853", rtol=rtol, atol=atol,
                    max_step=max_step, dense_output=False, **kwargs)
    status = STATUS_OK if sol.success else STATUS_STEP_UNDERFLOW
    ys = sol.y[0] + 1j * sol.y[1]
    ps = sol.y[2] + 1j * sol.y[3]
    return sol.t.copy(), ys, ps, sol.y[4].copy(), status
