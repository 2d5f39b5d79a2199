"""Hot-kernel backend selection.

The compiled Cython extension is preferred; the pure numpy/scipy fallback is
used when the extension is missing or when the environment variable
``SADS_UDW_PURE`` is set (any non-empty value).  Both expose the same
exception-free primitives; the wrappers here convert status codes into
exceptions so callers never branch on the backend.
"""
from __future__ import annotations

import os

import numpy as np

from ..errors import DegenerateIndicialError

if os.environ.get("SADS_UDW_PURE"):
    from . import _pure as _backend
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _backend

BACKEND = _backend.NAME

_STATUS_MSG = {
    _backend.STATUS_STEP_UNDERFLOW: "step size underflow",
    _backend.STATUS_TOO_MANY_STEPS: "step budget exhausted",
}


def frobenius_scaled(s_tab, t_tab, u_tab, n_max):
    """Scaled coefficients b_n = a_n (-x_+)^n of the horizon Frobenius series.

    Raises
    ------
    DegenerateIndicialError
        If some indicial factor P_n vanishes for n <= n_max.
    """
    b, bad_n = _backend.frobenius_scaled(
        np.asarray(s_tab, dtype=np.complex128),
        np.asarray(t_tab, dtype=np.complex128),
        np.asarray(u_tab, dtype=np.complex128),
        int(n_max))
    if bad_n >= 0:
        raise DegenerateIndicialError(bad_n)
    return b


def integrate_radial(r0, vl, omega, y0, p0, x0, t0, t1, *,
                     rtol=1e-10, atol=1e-12, max_step, first_step=None):
    """Adaptive propagation of (y, y', x) in the tortoise coordinate.

    Returns ``(ts, ys, ps, xs)`` at the accepted steps, endpoints included.

    Raises
    ------
    RuntimeError
        If the stepper underflows or exceeds its step budget.
    """
    ts, ys, ps, xs, status = _backend.integrate_radial(
        float(r0), float(vl), float(omega),
        complex(y0), complex(p0), float(x0),
        float(t0), float(t1), float(rtol), float(atol), float(max_step),
        first_step)
    if status != _backend.STATUS_OK:
        raise RuntimeError(
            f"radial integration failed: {_STATUS_MSG.get(status, status)} "
            f"(omega={omega:g}, l(l+1)={vl:g}, interval=[{t0:g},{t1:g}])")
    return ts, ys, ps, xs
