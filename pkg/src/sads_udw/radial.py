"""Radial solutions of the conformally coupled massless scalar on SAdS.

Two independent routes produce the real Dirichlet mode R_{omega l}(r):

* a truncated horizon power series in x = 1/r whose partial sums at the
  AdS boundary x = 0 yield the matching phase theta0, and
* outward/inward adaptive ODE propagation in the tortoise coordinate with
  theta0 extracted from the (constant) Wronskian against the Dirichlet
  branch seeded at the boundary.

Both construct R_{omega l}(r) = r^-1 2 Im[e^{-i(theta0 + omega r*)} psi_in],
normalized so the near-horizon amplitude of r R is 2.

A numerical note on the series route: the raw coefficients a_n scale like
x_+^-n and leave the double range within a few hundred terms, so everything
is carried in the scaled form b_n = a_n (-x_+)^n.  The scaled terms are
exactly the summands of the boundary evaluation, and the series at radius r
becomes a power series in 1 - r_+/r with the b_n as coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .errors import (AccuracyError, ConfigurationError, ConvergenceError,
                     DomainError)
from .geometry import Geometry

__all__ = [
    "ModeKey",
    "SeriesSolution",
    "PhysicalMode",
    "Theta0SeriesResult",
    "Theta0WronskianResult",
    "potential",
    "effective_potential",
    "build_series",
    "theta0_series",
    "theta0_wronskian",
    "physical_mode",
    "propagate_in_mode",
    "default_n_schedule",
    "series_n_estimate",
    "effective_potential_max",
]

# Solver defaults (paper-gap engineering choices).
SEED_DELTA = 1e-6          # relative offset of the near-horizon ODE seed
BOUNDARY_ETA = 1e-6        # |r*| cut at the AdS boundary end
ODE_RTOL = 1e-11
ODE_ATOL = 1e-13
PHASE_TOL = 1e-8           # successive-truncation phase tolerance
WRONSKIAN_DRIFT_TOL = 1e-8
N_SCHEDULE_MAX = 4000
SEED_SERIES_TERMS = 8      # near-horizon seed: value/derivative from few terms
BOUNDARY_SERIES_TERMS = 6  # Dirichlet seed: 6-term series in x about x = 0


def default_n_schedule(n_max: int = N_SCHEDULE_MAX):
    """Truncation schedule N = 100, 150, ..., n_max."""
    return list(range(100, n_max + 1, 50))


def potential(g: Geometry, l: int, r):
    """Radial potential V = l(l+1)/r^2 + r0/r^3 of the conformal coupling."""
    if l < 0:
        raise DomainError("l must be a nonnegative integer")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise DomainError("potential requires r > 0")
    out = l * (l + 1) / (r * r) + g.r0 / (r * r * r)
    return float(out) if out.ndim == 0 else out


def effective_potential(g: Geometry, l: int, r):
    """Scattering form Vt = f(r) V(r); vanishes at the horizon, -> l(l+1) at infinity."""
    return g.lapse(r) * potential(g, l, r)


def _effective_potential_x(g: Geometry, vl: float, x):
    """Vt in inverse-radius form: (1 + x^2 - r0 x^3)(l(l+1) + r0 x)."""
    return g.xsq_lapse(x) * (vl + g.r0 * x)


# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeKey:
    """Identifies one radial problem: frequency, multipole, and branch."""

    omega: float
    l: int
    branch: str

    def __post_init__(self):
        if self.branch not in ("in", "out", "physical"):
            raise DomainError(f"unknown branch {self.branch!r}")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise DomainError("omega must be positive and finite")
        if self.l < 0 or int(self.l) != self.l:
            raise DomainError("l must be a nonnegative integer")


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    """Truncated horizon expansion psi = sum a_n (x - x_+)^n of one branch.

    ``coeffs_scaled[n]`` holds b_n = a_n (-x_+)^n; ``s_table``/``t_table``/
    ``u_table`` are the raw Taylor coefficients of the three quartics about
    x_+ (ascending, length 5).
    """

    branch: str
    x_plus: float
    coeffs_scaled: np.ndarray
    n_terms: int
    s_table: np.ndarray
    t_table: np.ndarray
    u_table: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        """Raw a_n.  Under/overflows float range for large n when x_+ != 1;
        prefer ``coeffs_scaled`` for numerics."""
        n = np.arange(self.n_terms + 1, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            return self.coeffs_scaled * (-1.0 / self.x_plus) ** n

    def evaluate(self, x, n_trunc: Optional[int] = None):
        """psi(x) from the first ``n_trunc`` + 1 scaled terms (default: all)."""
        b = self._trunc(n_trunc)
        xi = 1.0 - np.asarray(x, dtype=float) / self.x_plus
        return np.polynomial.polynomial.polyval(xi, b)

    def derivative(self, x, n_trunc: Optional[int] = None):
        """d psi / d x at x."""
        b = self._trunc(n_trunc)
        db = b[1:] * np.arange(1, b.size)
        xi = 1.0 - np.asarray(x, dtype=float) / self.x_plus
        return -np.polynomial.polynomial.polyval(xi, db) / self.x_plus

    def boundary_partial_sums(self) -> np.ndarray:
        """Partial sums of psi at x = 0 for every truncation 0..N."""
        return np.cumsum(self.coeffs_scaled)

    def recurrence_residual(self) -> np.ndarray:
        """Relative residual of each scaled coefficient against the recurrence."""
        b = self.coeffs_scaled
        scale = np.power(-self.x_plus, np.arange(5))
        st = self.s_table * scale
        tt = self.t_table * scale
        ut = self.u_table * scale
        s0, t0 = self.s_table[0], self.t_table[0]
        res = np.zeros(self.n_terms + 1)
        for n in range(1, self.n_terms + 1):
            p_n = n * (n - 1) * s0 + n * t0
            acc = 0.0 + 0.0j
            for j in range(1, min(4, n) + 1):
                k = n - j
                acc += (k * (k - 1) * st[j] + k * tt[j] + ut[j]) * b[k]
            res[n] = abs(b[n] * p_n + acc) / max(abs(b[n] * p_n), 1e-300)
        return res

    def _trunc(self, n_trunc):
        if n_trunc is None:
            return self.coeffs_scaled
        return self.coeffs_scaled[:int(n_trunc) + 1]


@dataclass(frozen=True, eq=False)
class Theta0SeriesResult:
    """Matching phase from boundary partial sums, with convergence history."""

    theta0: float
    n_converged: int
    history: tuple
    boundary_sum: complex
    coeff_in: complex       # A with A S_in + B S_out = 0
    coeff_out: complex      # B = conj(A); |B/A| = 1 for real omega
    series: SeriesSolution


@dataclass(frozen=True, eq=False)
class Theta0WronskianResult:
    """Matching phase from ODE propagation and Wronskian alignment."""

    theta0: float
    scale_factor: float     # physical r R = scale_factor * Dirichlet branch
    wronskian_drift: float
    wronskian_scale_drift: float  # drift over the constituent product scale
    boundary_amplitude: float   # |psi_in(x=0)|; dips at resonances
    r_star_seed: float
    r_star_boundary: float
    in_branch: "ModeBranch"
    dirichlet_branch: "ModeBranch"
    seed_series: SeriesSolution
    boundary_coeffs: np.ndarray


# ----------------------------------------------------------------------------
# horizon series
# ----------------------------------------------------------------------------

def _taylor_shift(coeffs, x0):
    """Taylor coefficients about x0 of the polynomial with ascending ``coeffs``."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    deg = coeffs.size - 1
    out = np.zeros_like(coeffs)
    for i in range(deg + 1):
        ci = coeffs[i]
        if ci == 0.0:
            continue
        for j in range(i + 1):
            out[j] += ci * math.comb(i, j) * x0 ** (i - j)
    return out


def _quartic_tables(g: Geometry, omega: float, l: int, branch: str):
    """Taylor tables about x_+ of the quartics s, t^(branch), u."""
    x_plus = 1.0 / g.r_plus
    vl = float(l * (l + 1))
    sgn = -1.0 if branch == "in" else 1.0
    # ascending coefficients in x
    s_poly = np.array([0.0, 0.0, 1.0 / x_plus, 1.0 / x_plus ** 2,
                       (x_plus ** 2 + 1.0) / x_plus ** 3], dtype=np.complex128)
    t_poly = np.array([0.0, 0.0, sgn * 2.0j * omega, -2.0, 3.0 * g.r0],
                      dtype=np.complex128)
    u_poly = np.array([0.0, 0.0, -x_plus * vl, vl - x_plus * g.r0, g.r0],
                      dtype=np.complex128)
    return (_taylor_shift(s_poly, x_plus),
            _taylor_shift(t_poly, x_plus),
            _taylor_shift(u_poly, x_plus))


def build_series(g: Geometry, key: ModeKey, n_terms: int) -> SeriesSolution:
    """Solve the five-term recurrence for the horizon expansion of one branch.

    Raises
    ------
    DegenerateIndicialError
        If an indicial factor P_n vanishes (cannot happen for real omega > 0).
    """
    if key.branch not in ("in", "out"):
        raise DomainError("build_series handles the in/out branches only")
    if n_terms < 5:
        raise DomainError("n_terms must be at least 5")
    if g.r_plus <= 0.0:
        raise DomainError("series expansion requires a horizon (r_plus > 0)")
    s_tab, t_tab, u_tab = _quartic_tables(g, key.omega, key.l, key.branch)
    x_plus = 1.0 / g.r_plus
    scale = np.power(-x_plus, np.arange(5))
    b = kernels.frobenius_scaled(s_tab * scale, t_tab * scale, u_tab * scale,
                                 n_terms)
    return SeriesSolution(branch=key.branch, x_plus=x_plus, coeffs_scaled=b,
                          n_terms=n_terms, s_table=s_tab, t_table=t_tab,
                          u_table=u_tab)


def series_n_estimate(g: Geometry, phase_tol: float = PHASE_TOL,
                      omega: float = 0.0) -> int:
    """Crude truncation estimate for the boundary partial sums.

    The geometric tail decays like rho^n with
    rho = sqrt((x_+^2 + 1)/(x_+^2 + 3)); before that sets in, the
    coefficients ride an oscillatory transient whose length grows like
    (omega x_+)^2 (calibrated empirically).  Targets a tail below
    ``phase_tol`` with a decade of margin.
    """
    x_plus = 1.0 / g.r_plus
    x2 = x_plus * x_plus
    rho = math.sqrt((x2 + 1.0) / (x2 + 3.0))
    if rho >= 1.0:
        return 10 ** 9
    tail = int(math.log(0.1 * phase_tol) / math.log(rho)) + 1
    transient = int(0.7 * (omega * x_plus) ** 2)
    return tail + transient


def _wrap_phase(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    theta = math.remainder(theta, 2.0 * math.pi)
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


def theta0_series(g: Geometry, omega: float, l: int,
                  n_schedule=None, phase_tol: float = PHASE_TOL
                  ) -> Theta0SeriesResult:
    """Boundary-matching phase from partial sums of the horizon series at x = 0.

    Runs the truncation schedule and declares convergence when successive
    phases differ by less than ``phase_tol`` radians.

    Raises
    ------
    ConvergenceError
        If the schedule is exhausted; carries the (N, theta) history.  This is
        the expected outcome for large omega, large l, or small r_plus, where
        the ODE route should be used instead.
    """
    if n_schedule is None:
        n_schedule = default_n_schedule()
    n_schedule = sorted(int(n) for n in n_schedule)
    if not n_schedule:
        raise DomainError("empty truncation schedule")
    series = build_series(g, ModeKey(omega=omega, l=l, branch="in"),
                          n_schedule[-1])
    sums = series.boundary_partial_sums()
    history = []
    prev_theta = None
    for n in n_schedule:
        s = sums[n]
        theta = math.atan2(s.imag, s.real)
        history.append((n, theta))
        if prev_theta is not None:
            dtheta = _wrap_phase(theta - prev_theta)
            if abs(dtheta) < phase_tol:
                theta0 = _wrap_phase(theta)
                a = -1.0j * np.exp(-1.0j * theta0)
                return Theta0SeriesResult(
                    theta0=theta0, n_converged=n, history=tuple(history),
                    boundary_sum=complex(s), coeff_in=complex(a),
                    coeff_out=complex(np.conj(a)), series=series)
        prev_theta = theta
    raise ConvergenceError(
        f"phase not converged to {phase_tol:g} rad by N={n_schedule[-1]} "
        f"(omega={omega:g}, l={l}, r_plus={g.r_plus:g})", history=history)


# ----------------------------------------------------------------------------
# ODE branches and Hermite reconstruction
# ----------------------------------------------------------------------------

# Two-point Hermite interpolation of degree 7 on the unit interval: the
# first four monomial coefficients are the scaled Taylor coefficients at the
# left node; the last four solve the value/derivative constraints at tau = 1.
#   [sum c_k, sum k c_k, sum k(k-1) c_k, sum k(k-1)(k-2) c_k] for k = 4..7
_HERMITE_M4_INV = np.linalg.inv(np.array([
    [1.0, 1.0, 1.0, 1.0],
    [4.0, 5.0, 6.0, 7.0],
    [12.0, 20.0, 30.0, 42.0],
    [24.0, 60.0, 120.0, 210.0],
]))


def _hermite_monomial_coeffs(t0, t1, d0, d1):
    """Monomial coefficients in tau = (t - t0)/(t1 - t0) of the degree-7
    interpolant matching value and first three derivatives at both ends.

    ``d0``/``d1``: arrays (..., 4) of value and derivatives at t0 and t1.
    """
    h = (t1 - t0)[..., None]
    fact = np.array([1.0, 1.0, 2.0, 6.0])
    powers = np.concatenate([np.ones_like(h), h, h * h, h * h * h], axis=-1)
    e = d0 * powers / fact      # Taylor coefficients at tau = 0
    w = d1 * powers / fact      # Taylor coefficients at tau = 1
    rhs = np.empty_like(e)
    rhs[..., 0] = w[..., 0] - (e[..., 0] + e[..., 1] + e[..., 2] + e[..., 3])
    rhs[..., 1] = w[..., 1] - (e[..., 1] + 2.0 * e[..., 2] + 3.0 * e[..., 3])
    rhs[..., 2] = 2.0 * w[..., 2] - (2.0 * e[..., 2] + 6.0 * e[..., 3])
    rhs[..., 3] = 6.0 * w[..., 3] - 6.0 * e[..., 3]
    tail = rhs @ _HERMITE_M4_INV.T
    return np.concatenate([e, tail], axis=-1)


class ModeBranch:
    """One propagated radial solution with septic-Hermite dense evaluation.

    Stores the accepted steps (t, y, y', x) and reconstructs y and y' between
    them using the ODE itself for the higher derivatives at the nodes, which
    keeps the interpolation error at the level of the integration tolerance.
    """

    def __init__(self, ts, ys, ps, xs, r0, vl, omega):
        order = np.argsort(ts)
        self.ts = np.asarray(ts, dtype=float)[order]
        self.ys = np.asarray(ys, dtype=np.complex128)[order]
        self.ps = np.asarray(ps, dtype=np.complex128)[order]
        self.xs = np.asarray(xs, dtype=float)[order]
        self.r0 = float(r0)
        self.vl = float(vl)
        self.omega = float(omega)

        x = self.xs
        gg = 1.0 + x * x - r0 * x ** 3
        gx = 2.0 * x - 3.0 * r0 * x * x
        gxx = 2.0 - 6.0 * r0 * x
        vt = gg * (vl + r0 * x)
        vtx = gx * (vl + r0 * x) + gg * r0
        vtxx = gxx * (vl + r0 * x) + 2.0 * gx * r0
        w = vt - omega * omega
        vt1 = -gg * vtx                      # dVt/dr*
        vt2 = gg * gx * vtx + gg * gg * vtxx  # d2Vt/dr*2

        y2 = w * self.ys
        y3 = w * self.ps + vt1 * self.ys
        y4 = w * y2 + 2.0 * vt1 * self.ps + vt2 * self.ys
        dy = np.stack([self.ys, self.ps, y2, y3], axis=-1)
        dp = np.stack([self.ps, y2, y3, y4], axis=-1)
        self._cy = _hermite_monomial_coeffs(self.ts[:-1], self.ts[1:],
                                            dy[:-1], dy[1:])
        self._cp = _hermite_monomial_coeffs(self.ts[:-1], self.ts[1:],
                                            dp[:-1], dp[1:])

    @property
    def t_min(self):
        return self.ts[0]

    @property
    def t_max(self):
        return self.ts[-1]

    def _segments(self, t):
        idx = np.searchsorted(self.ts, t, side="right") - 1
        return np.clip(idx, 0, self.ts.size - 2)

    def _eval(self, coeffs, t):
        t = np.asarray(t, dtype=float)
        idx = self._segments(t)
        tau = (t - self.ts[idx]) / (self.ts[idx + 1] - self.ts[idx])
        c = coeffs[idx]
        acc = c[..., 7]
        for j in (6, 5, 4, 3, 2, 1, 0):
            acc = acc * tau + c[..., j]
        return acc

    def y_at(self, t):
        return self._eval(self._cy, t)

    def p_at(self, t):
        return self._eval(self._cp, t)


def _dirichlet_boundary_coeffs(g: Geometry, omega: float, vl: float,
                               n_terms: int = BOUNDARY_SERIES_TERMS
                               ) -> np.ndarray:
    """Taylor coefficients in x of the Dirichlet branch about the boundary.

    Normalized to D(0) = 0 and dD/dr*(0) = +1 (so d1 = -1, since
    d/dr* = -(1 + x^2 - r0 x^3) d/dx).
    """
    r0 = g.r0
    gx = np.array([1.0, 0.0, 1.0, -r0])
    dgx = np.array([0.0, 2.0, -3.0 * r0])
    g2 = np.convolve(gx, gx)                       # degree 6
    g1 = np.convolve(gx, dgx)                      # degree 5
    vt = np.convolve(gx, np.array([vl, r0]))       # degree 4
    g0 = -vt
    g0[0] += omega * omega
    d = np.zeros(n_terms)
    if n_terms > 1:
        d[1] = -1.0
    for k in range(2, n_terms):
        acc = 0.0
        for m in range(1, min(6, k - 2) + 1):
            j = k - m
            acc += g2[m] * j * (j - 1) * d[j]
        for m in range(0, min(5, k - 2) + 1):
            j = k - 1 - m
            acc += g1[m] * j * d[j]
        for m in range(0, min(4, k - 2) + 1):
            acc += g0[m] * d[k - 2 - m]
        d[k] = -acc / (k * (k - 1))
    return d


def _polyval(coeffs, x):
    return np.polynomial.polynomial.polyval(x, coeffs)


def effective_potential_max(g: Geometry, l: int) -> float:
    """Supremum of Vt over the exterior (sampled; Vt is smooth and bounded)."""
    x_grid = np.linspace(0.0, 1.0 / g.r_plus, 513)
    return float(np.max(_effective_potential_x(g, float(l * (l + 1)), x_grid)))


def _ode_scales(g: Geometry, omega: float, vl: float):
    """(max_step, first_step) keeping (local rate) x (step) small enough for
    the septic Hermite reconstruction between accepted steps."""
    x_grid = np.linspace(0.0, 1.0 / g.r_plus, 513)
    vt_max = float(np.max(_effective_potential_x(g, vl, x_grid)))
    scale = math.sqrt(omega * omega + max(vt_max, 0.0))
    return 0.6 / scale, 0.1 / scale


def propagate_in_mode(g: Geometry, omega: float, l: int, *,
                      seed_delta: float = SEED_DELTA,
                      boundary_eta: float = BOUNDARY_ETA,
                      rtol: float = ODE_RTOL, atol: float = ODE_ATOL):
    """Propagate e^{-i omega r*} psi_in from a horizon series seed outward.

    Returns ``(branch, seed_series, r_star_seed, r_star_boundary)``; the
    branch covers [r_star_seed, r_star_boundary] with the boundary cut at
    x = boundary_eta.

    Raises
    ------
    ConfigurationError
        If the seed and boundary cut do not bound a nonempty interval.
    """
    if g.r_plus <= 0.0:
        raise DomainError("mode propagation requires a horizon")
    if omega <= 0.0:
        raise DomainError("omega must be positive")
    vl = float(l * (l + 1))

    r_seed = g.r_plus * (1.0 + seed_delta)
    x_seed = 1.0 / r_seed
    rs_seed = g.tortoise(r_seed)
    seed_series = build_series(g, ModeKey(omega=omega, l=l, branch="in"),
                               SEED_SERIES_TERMS)
    psi = complex(seed_series.evaluate(x_seed))
    psi_x = complex(seed_series.derivative(x_seed))
    phase = np.exp(-1.0j * omega * rs_seed)
    y_seed = phase * psi
    p_seed = phase * (-1.0j * omega * psi - g.xsq_lapse(x_seed) * psi_x)

    rs_bound = g.tortoise(1.0 / boundary_eta)
    if not rs_seed < rs_bound:
        raise ConfigurationError(
            f"empty overlap: r*_seed={rs_seed:g} >= r*_boundary={rs_bound:g}")
    max_step, first_step = _ode_scales(g, omega, vl)
    ts, ys, ps, xs = kernels.integrate_radial(
        g.r0, vl, omega, y_seed, p_seed, x_seed, rs_seed, rs_bound,
        rtol=rtol, atol=atol, max_step=max_step, first_step=first_step)
    branch = ModeBranch(ts, ys, ps, xs, g.r0, vl, omega)
    return branch, seed_series, rs_seed, rs_bound


def theta0_wronskian(g: Geometry, omega: float, l: int, *,
                     seed_delta: float = SEED_DELTA,
                     boundary_eta: float = BOUNDARY_ETA,
                     rtol: float = ODE_RTOL, atol: float = ODE_ATOL,
                     drift_tol: float = WRONSKIAN_DRIFT_TOL
                     ) -> Theta0WronskianResult:
    """Matching phase via outward in-mode and inward Dirichlet propagation.

    The in-mode is seeded from the horizon series at r_+(1 + seed_delta) and
    integrated to the boundary cut; the Dirichlet branch is seeded from a
    short boundary series at x = boundary_eta and integrated inward.  theta0
    is the phase of the conserved Wronskian W[e^{-i omega r*} psi_in, D],
    which equals the boundary value of e^{-i omega r*} psi_in under the
    normalization dD/dr*(0) = 1.

    Raises
    ------
    AccuracyError
        If the sampled Wronskian drifts by more than ``drift_tol`` relative.
    ConfigurationError
        If the seed and boundary cut do not bound a nonempty interval.
    """
    in_branch, seed_series, rs_seed, rs_bound = propagate_in_mode(
        g, omega, l, seed_delta=seed_delta, boundary_eta=boundary_eta,
        rtol=rtol, atol=atol)
    vl = float(l * (l + 1))

    x_bound = boundary_eta
    d_coeffs = _dirichlet_boundary_coeffs(g, omega, vl)
    y_bound = complex(_polyval(d_coeffs, x_bound))
    dx = d_coeffs[1:] * np.arange(1, d_coeffs.size)
    p_bound = complex(-g.xsq_lapse(x_bound) * _polyval(dx, x_bound))

    max_step, first_step = _ode_scales(g, omega, vl)
    ts_d, ys_d, ps_d, xs_d = kernels.integrate_radial(
        g.r0, vl, omega, y_bound, p_bound, x_bound, rs_bound, rs_seed,
        rtol=rtol, atol=atol, max_step=max_step, first_step=first_step)
    dirichlet = ModeBranch(ts_d, ys_d, ps_d, xs_d, g.r0, vl, omega)

    # Sample the Wronskian over the outer part of the overlap, away from the
    # potential barrier where opposing exponential growth of the two branches
    # makes the cancellation meaningless in floating point.
    span = rs_bound - rs_seed
    t_lo = rs_bound - 0.3 * span
    samples = np.linspace(t_lo, rs_bound, 33)
    y_i, p_i = in_branch.y_at(samples), in_branch.p_at(samples)
    y_d, p_d = dirichlet.y_at(samples), dirichlet.p_at(samples)
    w = y_i * p_d - p_i * y_d
    w_mean = complex(np.mean(w))
    spread = float(np.max(np.abs(w - w_mean)))
    drift = spread / max(abs(w_mean), 1e-300)
    # At a resonance W itself vanishes and no relative measure is
    # attainable; the constituent scale certifies the propagation instead.
    w_scale = float(np.median(np.abs(y_i) * np.abs(p_d)
                              + np.abs(p_i) * np.abs(y_d)))
    scale_drift = spread / max(w_scale, 1e-300)
    if drift > drift_tol:
        raise AccuracyError(
            f"Wronskian drift {drift:.3e} exceeds {drift_tol:g} "
            f"(omega={omega:g}, l={l}, r_plus={g.r_plus:g})")

    theta0 = _wrap_phase(math.atan2(w_mean.imag, w_mean.real))

    # Scale aligning the Dirichlet branch with 2 Im[e^{-i theta0} y_in],
    # fitted near the horizon where the imaginary-part extraction is well
    # conditioned (|y_in| ~ 1 there; in any barrier region further out the
    # physical mode is exponentially subdominant inside y_in and only the
    # directly integrated Dirichlet branch represents it stably).
    t_fit = np.linspace(rs_seed, rs_seed + 0.3 * span, 17)
    phys_fit = 2.0 * np.imag(np.exp(-1.0j * theta0) * in_branch.y_at(t_fit))
    dir_fit = np.real(dirichlet.y_at(t_fit))
    denom = float(np.dot(dir_fit, dir_fit))
    if denom > 0.0:
        kappa = float(np.dot(phys_fit, dir_fit)) / denom
    else:
        j_ref = int(np.argmax(np.abs(dir_fit)))
        kappa = float(phys_fit[j_ref]) / float(dir_fit[j_ref])

    return Theta0WronskianResult(
        theta0=theta0, scale_factor=kappa, wronskian_drift=drift,
        wronskian_scale_drift=scale_drift, boundary_amplitude=abs(w_mean),
        r_star_seed=rs_seed, r_star_boundary=rs_bound,
        in_branch=in_branch, dirichlet_branch=dirichlet,
        seed_series=seed_series, boundary_coeffs=d_coeffs)


# ----------------------------------------------------------------------------
# physical modes
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PhysicalMode:
    """The real Dirichlet mode R_{omega l}(r), normalized near the horizon.

    ``radial_tilde`` evaluates r R (the Schrodinger-form wavefunction) and
    ``radial`` evaluates R itself; both accept scalars or arrays of radii in
    (r_plus, r_max].  ``normalization_residual`` certifies the fitted
    near-horizon amplitude against the exact value 2.
    """

    key: ModeKey
    geometry: Geometry
    theta0: float
    method: str
    normalization_residual: float
    r_max: float
    series: Optional[SeriesSolution] = None
    n_trunc: Optional[int] = None
    seed_series: Optional[SeriesSolution] = None
    in_branch: Optional[ModeBranch] = None
    dirichlet_branch: Optional[ModeBranch] = None
    scale_factor: Optional[float] = None
    boundary_coeffs: Optional[np.ndarray] = None
    wronskian_drift: Optional[float] = None

    def radial(self, r):
        """R_{omega l}(r)."""
        r = np.asarray(r, dtype=float)
        out = self.radial_tilde(r) / r
        return float(out) if out.ndim == 0 else out

    def radial_tilde(self, r):
        """r R_{omega l}(r); -> -2 sin(omega r* + theta0) near the horizon."""
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr <= self.geometry.r_plus):
            raise DomainError("mode evaluation requires r > r_plus")
        scalar = r_arr.ndim == 0
        r_arr = np.atleast_1d(r_arr)
        if self.method == "series":
            out = self._series_eval(r_arr, self.series, self.n_trunc)
        else:
            out = self._wronskian_eval(r_arr)
        return float(out[0]) if scalar else out

    def _series_eval(self, r_arr, series, n_trunc):
        rs = self.geometry.tortoise(r_arr)
        x = 1.0 / r_arr
        psi = series.evaluate(x, n_trunc)
        return 2.0 * np.imag(np.exp(-1.0j * (self.theta0 + self.key.omega * rs))
                             * psi)

    def _wronskian_eval(self, r_arr):
        # The Dirichlet branch (integrated inward from the boundary) is the
        # stable representation everywhere: in classically forbidden regions
        # the physical mode is exponentially subdominant inside the in-mode
        # and cannot be recovered from 2 Im[e^{-i theta0} y_in] in floating
        # point, while kappa y_D computes it directly.
        rs = np.atleast_1d(self.geometry.tortoise(r_arr))
        out = np.empty_like(rs)
        lo = rs < self.dirichlet_branch.t_min
        hi = rs > self.dirichlet_branch.t_max
        mid = ~(lo | hi)
        if np.any(mid):
            y = np.real(self.dirichlet_branch.y_at(rs[mid]))
            out[mid] = self.scale_factor * y
        if np.any(lo):
            out[lo] = self._series_eval(r_arr[lo], self.seed_series, None)
        if np.any(hi):
            x = 1.0 / r_arr[hi]
            out[hi] = self.scale_factor * _polyval(self.boundary_coeffs, x)
        return out


def _normalization_residual(g: Geometry, omega: float, theta0: float,
                            series: SeriesSolution) -> float:
    """Least-squares amplitude of r R against -2 sin(omega r* + theta0) just
    outside the horizon, returned as |amplitude - 2|."""
    for upper in (1e-8, 1e-7, 1e-6):
        deltas = np.geomspace(1e-9, upper, 8)
        r_fit = g.r_plus * (1.0 + deltas)
        rs = g.tortoise(r_fit)
        psi = series.evaluate(1.0 / r_fit)
        vals = 2.0 * np.imag(np.exp(-1.0j * (theta0 + omega * rs)) * psi)
        model = -np.sin(omega * rs + theta0)
        denom = float(np.dot(model, model))
        if denom > 1e-4 * model.size:
            amp = float(np.dot(vals, model)) / denom
            return abs(amp - 2.0)
    return math.nan


def _default_r_max(boundary_eta: float = BOUNDARY_ETA) -> float:
    # |r*(r)| < eta once r >= 1/eta, since |r*| = 1/r - 1/(3 r^3) + ...
    return 1.0 / boundary_eta


def physical_mode(g: Geometry, omega: float, l: int,
                  method: str = "auto", *,
                  r_max: Optional[float] = None,
                  n_schedule=None,
                  phase_tol: float = PHASE_TOL) -> PhysicalMode:
    """Construct R_{omega l} by the requested route.

    ``method="auto"`` uses the horizon series only where it is both fast and
    safe: the truncation schedule must cover its geometric tail estimate and
    omega^2 must clear the effective-potential supremum, so the in-mode
    representation carries no exponentially subdominant piece anywhere.
    Otherwise (and on series non-convergence) the ODE route is used.
    """
    if method not in ("series", "wronskian", "auto"):
        raise DomainError(f"unknown method {method!r}")
    if r_max is None:
        r_max = _default_r_max()
    key = ModeKey(omega=omega, l=l, branch="physical")

    if n_schedule is None:
        n_schedule = default_n_schedule()
    chosen = method
    if method == "auto":
        series_ok = (series_n_estimate(g, phase_tol, omega) <= max(n_schedule)
                     and omega * omega > effective_potential_max(g, l))
        chosen = "series" if series_ok else "wronskian"

    if chosen == "series":
        try:
            res = theta0_series(g, omega, l, n_schedule, phase_tol)
        except ConvergenceError:
            if method == "auto":
                chosen = "wronskian"
            else:
                raise
        else:
            resid = _normalization_residual(g, omega, res.theta0, res.series)
            return PhysicalMode(key=key, geometry=g, theta0=res.theta0,
                                method="series", normalization_residual=resid,
                                r_max=r_max, series=res.series,
                                n_trunc=res.n_converged)

    res = None
    ladder = (ODE_RTOL, 1e-12, 1e-13)
    for attempt, rtol in enumerate(ladder):
        try:
            res = theta0_wronskian(g, omega, l, rtol=rtol, atol=1e-2 * rtol)
            break
        except AccuracyError:
            # Near resonances |W| is small and the relative drift gate is
            # strict; tighten the stepper until the certificate clears.
            if attempt < len(ladder) - 1:
                continue
            # Exactly at a resonance no relative gate is attainable (W -> 0
            # while its constituents stay O(1)); accept the mode when the
            # propagation itself is certified against the constituent scale.
            res = theta0_wronskian(g, omega, l, rtol=rtol, atol=1e-2 * rtol,
                                   drift_tol=math.inf)
            if res.wronskian_scale_drift > WRONSKIAN_DRIFT_TOL:
                raise AccuracyError(
                    f"Wronskian constituent-scale drift "
                    f"{res.wronskian_scale_drift:.3e} exceeds "
                    f"{WRONSKIAN_DRIFT_TOL:g} (omega={omega:g}, l={l})")
    resid = _normalization_residual(g, omega, res.theta0, res.seed_series)
    return PhysicalMode(key=key, geometry=g, theta0=res.theta0,
                        method="wronskian", normalization_residual=resid,
                        r_max=r_max, seed_series=res.seed_series,
                        in_branch=res.in_branch,
                        dirichlet_branch=res.dirichlet_branch,
                        scale_factor=res.scale_factor,
                        boundary_coeffs=res.boundary_coeffs,
                        wronskian_drift=res.wronskian_drift)
