# cython: language_level=3
"""Compiled hot kernels: the scaled Frobenius recurrence and an adaptive
Dormand-Prince 5(4) integrator for the radial Schrodinger system.

Contracts mirror ``_pure``; see that module for documentation.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, sqrt

cnp.import_array()

NAME = "compiled"

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_TOO_MANY_STEPS = 2


def frobenius_scaled(s_tab, t_tab, u_tab, Py_ssize_t n_max):
    # The recurrence state is carried in extended precision (long double):
    # double rounding excites spurious slowly-decaying recurrence modes that
    # would dominate the geometric tail after a few thousand terms.
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] st = \
        np.ascontiguousarray(s_tab, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] tt = \
        np.ascontiguousarray(t_tab, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ut = \
        np.ascontiguousarray(u_tab, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b = \
        np.zeros(n_max + 1, dtype=np.complex128)
    cdef long double complex stl[5]
    cdef long double complex ttl[5]
    cdef long double complex utl[5]
    cdef long double complex hist[4]   # b_{n-1} .. b_{n-4}, full precision
    cdef long double complex acc, p_n, b_n
    cdef Py_ssize_t n, j, k, jmax, i
    for i in range(5):
        stl[i] = st[i]
        ttl[i] = tt[i]
        utl[i] = ut[i]
    for i in range(4):
        hist[i] = 0.0
    hist[0] = 1.0
    b[0] = 1.0
    for n in range(1, n_max + 1):
        p_n = (<long double>(n * (n - 1))) * stl[0] + (<long double>n) * ttl[0]
        if p_n == 0.0:
            return b, n
        acc = 0.0
        jmax = 4 if n > 4 else n
        for j in range(1, jmax + 1):
            k = n - j
            acc = acc + ((<long double>(k * (k - 1))) * stl[j]
                         + (<long double>k) * ttl[j] + utl[j]) * hist[j - 1]
        b_n = -acc / p_n
        hist[3] = hist[2]
        hist[2] = hist[1]
        hist[1] = hist[0]
        hist[0] = b_n
        b[n] = <double complex>b_n
    return b, -1


cdef inline void _rhs(double r0, double vl, double omega2,
                      double* u, double* du) nogil:
    cdef double x = u[4]
    cdef double gg = 1.0 + x * x - r0 * x * x * x
    cdef double w = gg * (vl + r0 * x) - omega2
    du[0] = u[2]
    du[1] = u[3]
    du[2] = w * u[0]
    du[3] = w * u[1]
    du[4] = -gg


def integrate_radial(double r0, double vl, double omega,
                     double complex y0, double complex p0, double x0,
                     double t0, double t1,
                     double rtol, double atol, double max_step,
                     first_step):
    """Adaptive Dormand-Prince 5(4); returns (ts, ys, ps, xs, status)."""
    cdef double omega2 = omega * omega
    cdef double direction = 1.0 if t1 >= t0 else -1.0
    cdef double span = fabs(t1 - t0)
    cdef double h
    if first_step is not None and float(first_step) > 0.0:
        h = fmin(float(first_step), span)
    else:
        h = fmin(span * 1e-3, max_step)
    h = fmin(h, max_step)

    cdef Py_ssize_t cap = 1024
    cdef cnp.ndarray[cnp.float64_t, ndim=2] store = np.empty((cap, 6))
    cdef Py_ssize_t n_rows = 0

    cdef double u[5]
    cdef double unew[5]
    cdef double uerr[5]
    cdef double stage[5]
    cdef double k[7][5]
    cdef double t = t0
    cdef int i, s
    cdef double err, sc, tol_h, hnext
    cdef Py_ssize_t n_steps = 0
    cdef Py_ssize_t max_steps = 4000000
    cdef int status = STATUS_OK
    cdef bint last = 0

    # Dormand-Prince 5(4) tableau (same pair as scipy's RK45).
    cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0
    cdef double C5 = 8.0 / 9.0
    cdef double A21 = 1.0 / 5.0
    cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
    cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
    cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
    cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
    cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0
    cdef double A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0
    cdef double A65 = -5103.0 / 18656.0
    cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
    cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
    cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
    cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

    u[0] = y0.real
    u[1] = y0.imag
    u[2] = p0.real
    u[3] = p0.imag
    u[4] = x0

    store[0, 0] = t
    for i in range(5):
        store[0, 1 + i] = u[i]
    n_rows = 1

    _rhs(r0, vl, omega2, u, k[0])

    while direction * (t1 - t) > 0.0:
        if n_steps >= max_steps:
            status = STATUS_TOO_MANY_STEPS
            break
        if h >= fabs(t1 - t):
            h = fabs(t1 - t)
            last = 1
        else:
            last = 0
        if h <= 1e-14 * fmax(1.0, fabs(t)) and not last:
            status = STATUS_STEP_UNDERFLOW
            break

        for i in range(5):
            stage[i] = u[i] + direction * h * A21 * k[0][i]
        _rhs(r0, vl, omega2, stage, k[1])
        for i in range(5):
            stage[i] = u[i] + direction * h * (A31 * k[0][i] + A32 * k[1][i])
        _rhs(r0, vl, omega2, stage, k[2])
        for i in range(5):
            stage[i] = u[i] + direction * h * (A41 * k[0][i] + A42 * k[1][i]
                                               + A43 * k[2][i])
        _rhs(r0, vl, omega2, stage, k[3])
        for i in range(5):
            stage[i] = u[i] + direction * h * (A51 * k[0][i] + A52 * k[1][i]
                                               + A53 * k[2][i] + A54 * k[3][i])
        _rhs(r0, vl, omega2, stage, k[4])
        for i in range(5):
            stage[i] = u[i] + direction * h * (A61 * k[0][i] + A62 * k[1][i]
                                               + A63 * k[2][i] + A64 * k[3][i]
                                               + A65 * k[4][i])
        _rhs(r0, vl, omega2, stage, k[5])
        for i in range(5):
            unew[i] = u[i] + direction * h * (B1 * k[0][i] + B3 * k[2][i]
                                              + B4 * k[3][i] + B5 * k[4][i]
                                              + B6 * k[5][i])
        _rhs(r0, vl, omega2, unew, k[6])

        err = 0.0
        for i in range(5):
            uerr[i] = direction * h * (E1 * k[0][i] + E3 * k[2][i]
                                       + E4 * k[3][i] + E5 * k[4][i]
                                       + E6 * k[5][i] + E7 * k[6][i])
            sc = atol + rtol * fmax(fabs(u[i]), fabs(unew[i]))
            err += (uerr[i] / sc) * (uerr[i] / sc)
        err = sqrt(err / 5.0)

        if err <= 1.0:
            t = t1 if last else t + direction * h
            for i in range(5):
                u[i] = unew[i]
                k[0][i] = k[6][i]
            if n_rows >= cap:
                cap *= 2
                store = np.ascontiguousarray(np.resize(store, (cap, 6)))
            store[n_rows, 0] = t
            for i in range(5):
                store[n_rows, 1 + i] = u[i]
            n_rows += 1
            n_steps += 1
            if err == 0.0:
                hnext = h * 10.0
            else:
                hnext = h * fmin(10.0, fmax(0.2, 0.9 * err ** (-0.2)))
            h = fmin(hnext, max_step)
        else:
            h = h * fmax(0.2, 0.9 * err ** (-0.2))

    out = store[:n_rows]
    ts = out[:, 0].copy()
    ys = (out[:, 1] + 1j * out[:, 2])
    ps = (out[:, 3] + 1j * out[:, 4])
    xs = out[:, 5].copy()
    return ts, ys, ps, xs, status
