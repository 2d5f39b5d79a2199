"""Schwarzschild-anti-de Sitter background: lapse, tortoise map, temperatures,
circular-geodesic kinematics, and unit-scaling reports.

Canonical units fix the AdS radius R = 1; every length below is in units of R.
The horizon radius ``r_plus`` is the primary input and the mass parameter
``r0 = r_plus (r_plus^2 + 1)`` is always derived from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NoCircularOrbitError

__all__ = [
    "Geometry",
    "CircularKinematics",
    "ScalingReport",
    "make_geometry",
    "pure_ads_geometry",
    "lapse",
    "tortoise",
    "circular_kinematics",
    "local_temperature",
    "rescale",
    "r_plus_from_r0",
]


@dataclass(frozen=True)
class Geometry:
    """Immutable SAdS background with horizon radius ``r_plus``.

    ``r_plus == 0`` encodes the pure-AdS limit (no horizon); it is constructed
    only through :func:`pure_ads_geometry` and exists as a test hook for the
    closed-form tortoise map of empty AdS.
    """

    r_plus: float
    r0: float
    hawking_temperature: float

    def lapse(self, r):
        """f(r) = r^2 + 1 - r0/r in units with R = 1."""
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise DomainError("lapse requires r > 0")
        out = r * r + 1.0 - self.r0 / r
        return float(out) if out.ndim == 0 else out

    def lapse_deriv(self, r):
        """f'(r) = 2 r + r0 / r^2."""
        r = np.asarray(r, dtype=float)
        out = 2.0 * r + self.r0 / (r * r)
        return float(out) if out.ndim == 0 else out

    def xsq_lapse(self, x):
        """x^2 f(1/x) = 1 + x^2 - r0 x^3, the lapse in inverse-radius form.

        Appears as dx/dr* = -(1 + x^2 - r0 x^3) and stays finite on the whole
        domain 0 <= x <= 1/r_plus, which makes it the workhorse for boundary
        quadratures and radial ODE systems.
        """
        return 1.0 + x * x - self.r0 * (x * x * x)

    def tortoise(self, r):
        """r*(r) = -int_r^inf dr'/f(r'), fixed to 0 at infinity (so r* < 0)."""
        r_arr = np.asarray(r, dtype=float)
        flat = np.ravel(r_arr)
        vals = np.array([_tortoise_scalar(self.r_plus, self.r0, float(ri))
                         for ri in flat])
        if r_arr.ndim == 0:
            return float(vals[0])
        return vals.reshape(r_arr.shape)


@dataclass(frozen=True)
class CircularKinematics:
    """Four-velocity components of a circular geodesic at ``orbit_radius``.

    ``a = dt/dtau`` and ``b = dphi/dtau`` satisfy the timelike normalization
    -f(r) a^2 + r^2 b^2 = -1.
    """

    orbit_radius: float
    a: float
    b: float


def make_geometry(r_plus: float) -> Geometry:
    """Construct the SAdS background for a given horizon radius.

    Raises
    ------
    DomainError
        If ``r_plus`` is not a positive finite number.
    """
    r_plus = float(r_plus)
    if not math.isfinite(r_plus) or r_plus <= 0.0:
        raise DomainError(f"r_plus must be positive, got {r_plus!r}")
    r0 = r_plus * (r_plus * r_plus + 1.0)
    t_hawking = (3.0 * r_plus * r_plus + 1.0) / (4.0 * math.pi * r_plus)
    return Geometry(r_plus=r_plus, r0=r0, hawking_temperature=t_hawking)


def pure_ads_geometry() -> Geometry:
    """The r0 = 0 limit (empty AdS): no horizon, r*(r) = arctan(r) - pi/2.

    Exposed purely as a verification hook; the Hawking temperature diverges in
    this limit and is stored as ``inf``.
    """
    return Geometry(r_plus=0.0, r0=0.0, hawking_temperature=math.inf)


def lapse(g: Geometry, r) -> float:
    """Metric function f(r); vanishes at the horizon."""
    return g.lapse(r)


def tortoise(g: Geometry, r) -> float:
    """Tortoise coordinate r*(r) with r*(inf) = 0; diverges to -inf at r_plus."""
    return g.tortoise(r)


def circular_kinematics(g: Geometry, r: float) -> CircularKinematics:
    """dt/dtau and dphi/dtau of the circular geodesic at radius ``r``.

    Raises
    ------
    NoCircularOrbitError
        If 2r <= 3 r0, where no timelike circular geodesic exists.
    """
    r = float(r)
    if r <= 0.0:
        raise DomainError("orbit radius must be positive")
    denom = 2.0 * r - 3.0 * g.r0
    if denom <= 0.0:
        raise NoCircularOrbitError(
            f"no circular geodesic at r={r:g} (need 2r > 3 r0 = {3.0 * g.r0:g})")
    a = math.sqrt(2.0 * r / denom)
    b = math.sqrt((g.r0 + 2.0 * r ** 3) / (r * r * denom))
    return CircularKinematics(orbit_radius=r, a=a, b=b)


def local_temperature(g: Geometry, r: float) -> float:
    """Tolman-shifted temperature T_loc = T_H / sqrt(f(r)) seen at radius r."""
    r = float(r)
    if r <= g.r_plus:
        raise DomainError(f"r={r:g} is not outside the horizon r_plus={g.r_plus:g}")
    return g.hawking_temperature / math.sqrt(g.lapse(r))


def r_plus_from_r0(r0: float) -> float:
    """Invert r0 = r_plus (r_plus^2 + 1) by safeguarded Newton iteration."""
    r0 = float(r0)
    if r0 <= 0.0:
        raise DomainError("r0 must be positive")
    lo, hi = 0.0, max(r0, r0 ** (1.0 / 3.0)) + 1.0
    x = max(r0 / 2.0, r0 ** (1.0 / 3.0))
    for _ in range(200):
        fx = x * (x * x + 1.0) - r0
        if fx > 0.0:
            hi = x
        else:
            lo = x
        dfx = 3.0 * x * x + 1.0
        step = fx / dfx
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-16 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


# ----------------------------------------------------------------------------
# scaling
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingReport:
    """Quantities of a geometry re-expressed in units where R = sigma.

    Maps follow t -> sigma t, r -> sigma r, omega -> omega/sigma,
    T_H -> T_H/sigma, F_dot(E) -> F_dot(E/sigma)/sigma.  The scaled lapse and
    temperature are recomputed from scratch with the general-R formulas so the
    report can serve as an independent arithmetic cross-check.
    """

    sigma: float
    r_plus: float
    r0: float
    ads_radius: float
    hawking_temperature: float

    def map_length(self, x):
        return self.sigma * np.asarray(x, dtype=float)

    def map_time(self, t):
        return self.sigma * np.asarray(t, dtype=float)

    def map_frequency(self, omega):
        return np.asarray(omega, dtype=float) / self.sigma

    def map_energy(self, energy):
        return np.asarray(energy, dtype=float) / self.sigma

    def map_rate(self, rate):
        return np.asarray(rate, dtype=float) / self.sigma

    def lapse(self, r_scaled):
        """f(r') = r'^2/R'^2 + 1 - r0'/r' evaluated in the scaled units."""
        r_scaled = np.asarray(r_scaled, dtype=float)
        return (r_scaled * r_scaled / (self.ads_radius * self.ads_radius)
                + 1.0 - self.r0 / r_scaled)

    def local_temperature(self, r_scaled):
        return self.hawking_temperature / np.sqrt(self.lapse(r_scaled))


def rescale(g: Geometry, sigma: float) -> ScalingReport:
    """Report the geometry's quantities under the unit rescaling R -> sigma.

    Raises
    ------
    DomainError
        If sigma is not positive.
    """
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise DomainError("sigma must be positive")
    r_plus = sigma * g.r_plus
    ads_radius = sigma
    r0 = r_plus * (r_plus * r_plus / (ads_radius * ads_radius) + 1.0)
    if g.r_plus > 0.0:
        t_hawking = ((3.0 * r_plus * r_plus / (ads_radius * ads_radius) + 1.0)
                     / (4.0 * math.pi * r_plus))
    else:
        t_hawking = math.inf
    return ScalingReport(sigma=sigma, r_plus=r_plus, r0=r0,
                         ads_radius=ads_radius, hawking_temperature=t_hawking)


# ----------------------------------------------------------------------------
# tortoise quadrature
# ----------------------------------------------------------------------------
#
# The integral is split at 2 r_plus.  Outside, substituting x = 1/r gives
# int dr/f = int dx / (1 + x^2 - r0 x^3), a smooth integrand bounded away from
# zero on [0, 1/(2 r_plus)].  Inside, the simple pole of 1/f at the horizon is
# subtracted analytically with residue 1/f'(r_plus) and restored as a log term.

_QUAD_EPSREL = 1e-12
_QUAD_LIMIT = 200


@lru_cache(maxsize=262144)
def _tortoise_scalar(r_plus: float, r0: float, r: float) -> float:
    if r <= r_plus:
        raise DomainError(f"tortoise requires r > r_plus, got r={r:g}")
    if not math.isfinite(r):
        return 0.0

    def inv_g(x):
        return 1.0 / (1.0 + x * x - r0 * x ** 3)

    if r_plus == 0.0 or r >= 2.0 * r_plus:
        val, _ = quad(inv_g, 0.0, 1.0 / r,
                      epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)
        return -val

    far, _ = quad(inv_g, 0.0, 0.5 / r_plus,
                  epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)

    # f'(r_plus) = 4 pi T_H; Taylor pieces of f about the horizon for the
    # regularized integrand 1/f - 1/(k (r - r_plus)).
    k = 3.0 * r_plus + 1.0 / r_plus
    c2 = 1.0 - r0 / r_plus ** 3
    c3 = r0 / r_plus ** 4
    c4 = -r0 / r_plus ** 5

    def regular(rr):
        delta = rr - r_plus
        if abs(delta) < 1e-7 * r_plus:
            num = c2 + delta * (c3 + delta * c4)
            den = k * k * (1.0 + (delta / k) * (c2 + delta * c3))
            return -num / den
        f = rr * rr + 1.0 - r0 / rr
        return 1.0 / f - 1.0 / (k * delta)

    near_reg, _ = quad(regular, r, 2.0 * r_plus,
                       epsabs=0.0, epsrel=_QUAD_EPSREL, limit=_QUAD_LIMIT)
    near = near_reg + math.log(r_plus / (r - r_plus)) / k
    return -(near + far)
