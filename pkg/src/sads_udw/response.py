"""Unruh-DeWitt transition rates on SAdS for static and circular detectors.

The static rate needs one mode per multipole (the time integral collapses to
a delta in frequency); the circular rate couples every azimuthal order m, so
the mode count per l grows like l.  Hartle-Hawking weights are thermal
(Bose-Einstein at the local temperature for a static detector), Boulware
weights are the zero-temperature limits.

All formulas return the dimensionless R * F_dot with R = 1 (canonical
units); per-l and per-(l, m) pieces are exposed so dips, steps, and tail
behavior can be inspected term by term.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrableEndpointError
from .geometry import (Geometry, circular_kinematics, local_temperature)
from .modecache import ModeCache, default_cache

__all__ = [
    "DetectorSpec",
    "RateCurve",
    "legendre_at_zero",
    "static_rate_hh",
    "static_rate_boulware",
    "circular_rate_hh",
    "circular_rate_boulware",
    "sum_l",
]

OMEGA_ZERO_THRESHOLD = 1e-9   # |omega_+-| below this is an integrable endpoint
DEFAULT_L_CEILING = 60        # hard stop for the adaptive multipole sum
TAIL_RUN = 3                  # consecutive negligible l needed to stop


@dataclass(frozen=True)
class DetectorSpec:
    """Trajectory, radius, vacuum, and multipole-summation policy."""

    trajectory: str                 # "static" | "circular"
    r: float
    vacuum: str                     # "hartle_hawking" | "boulware"
    l_max: Optional[int] = None     # None -> adaptive tail criterion
    tail_tolerance: float = 1e-4

    def __post_init__(self):
        if self.trajectory not in ("static", "circular"):
            raise DomainError(f"unknown trajectory {self.trajectory!r}")
        if self.vacuum not in ("hartle_hawking", "boulware"):
            raise DomainError(f"unknown vacuum {self.vacuum!r}")
        if self.l_max is not None and self.l_max < 0:
            raise DomainError("l_max must be nonnegative")
        if not self.tail_tolerance > 0.0:
            raise DomainError("tail_tolerance must be positive")

    def validate_against(self, g: Geometry):
        if not self.r > g.r_plus:
            raise DomainError(
                f"detector radius {self.r:g} not outside horizon {g.r_plus:g}")
        if self.trajectory == "circular":
            circular_kinematics(g, self.r)  # raises if no orbit exists


# ----------------------------------------------------------------------------
# angular weights
# ----------------------------------------------------------------------------

def legendre_at_zero(l: int, m: int) -> float:
    """Associated Legendre P_l^m(0) in the Condon-Shortley convention.

    Zero iff l + m is odd; otherwise
    (-1)^((l+m)/2) (l+m-1)!! / (l-m)!!, extended to negative m through
    P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m.
    """
    l = int(l)
    m_in = int(m)
    if l < 0 or abs(m_in) > l:
        raise DomainError(f"need 0 <= |m| <= l, got l={l}, m={m_in}")
    m = abs(m_in)
    if (l + m) % 2 == 1:
        return 0.0
    log_mag = _log_abs_legendre_at_zero(l, m)
    sign = -1.0 if ((l + m) // 2) % 2 else 1.0
    if m_in < 0:
        log_mag += math.lgamma(l - m + 1) - math.lgamma(l + m + 1)
        if m % 2:
            sign = -sign
    with np.errstate(over="ignore"):
        return sign * float(np.exp(log_mag))


def _log_abs_legendre_at_zero(l: int, m: int) -> float:
    """log |P_l^m(0)| for l + m even, m >= 0, via double-factorial gammas."""
    ln2 = math.log(2.0)
    p = (l + m) // 2
    q = (l - m) // 2
    log_num = math.lgamma(l + m + 1) - p * ln2 - math.lgamma(p + 1)
    log_den = q * ln2 + math.lgamma(q + 1)
    return log_num - log_den


def _angular_weight(l: int, m: int) -> float:
    """[(l-m)!/(l+m)!] |P_l^m(0)|^2, evaluated in log space (l ~ 85+ safe)."""
    if (l + abs(m)) % 2 == 1:
        return 0.0
    m = abs(m)  # the product is m-parity symmetric
    log_w = (math.lgamma(l - m + 1) - math.lgamma(l + m + 1)
             + 2.0 * _log_abs_legendre_at_zero(l, m))
    return math.exp(log_w)


# ----------------------------------------------------------------------------
# pointwise rates
# ----------------------------------------------------------------------------

def _mode_getter(g, cache, method):
    cache = cache if cache is not None else default_cache()
    def get(omega, l):
        return cache.get(g, omega, l, method=method)
    return get


def _static_r_squared(g, spec, energy, l_values, get_mode):
    f = g.lapse(spec.r)
    omega_t = math.sqrt(f) * abs(energy)
    return np.array([get_mode(omega_t, l).radial(spec.r) ** 2
                     for l in l_values])


def static_rate_hh(g: Geometry, spec: DetectorSpec, energy: float, *,
                   l_values=None, cache: Optional[ModeCache] = None,
                   method: str = "auto") -> np.ndarray:
    """Per-l static Hartle-Hawking rate pieces at detector gap ``energy``.

    F_dot(E) = (1/2E) (e^{E/T_loc} - 1)^-1 sum_l (2l+1)/(4 pi) R^2 at the
    single frequency omega = sqrt(f) |E| per multipole.

    Raises
    ------
    DomainError
        If energy == 0 (the stationary response diverges there).
    """
    spec.validate_against(g)
    if energy == 0.0:
        raise DomainError("static rate undefined at E = 0")
    if l_values is None:
        l_values = range((spec.l_max if spec.l_max is not None else 0) + 1)
    l_values = list(l_values)
    t_loc = local_temperature(g, spec.r)
    pref = 0.5 / (energy * math.expm1(energy / t_loc))
    weights = np.array([(2 * l + 1) / (4.0 * math.pi) for l in l_values])
    r2 = _static_r_squared(g, spec, energy, l_values,
                           _mode_getter(g, cache, method))
    return pref * weights * r2


def static_rate_boulware(g: Geometry, spec: DetectorSpec, energy: float, *,
                         l_values=None, cache: Optional[ModeCache] = None,
                         method: str = "auto") -> np.ndarray:
    """Per-l static Boulware pieces: Theta(-E) (1/2|E|) sum (2l+1)/(4pi) R^2."""
    spec.validate_against(g)
    if energy == 0.0:
        raise DomainError("static rate undefined at E = 0")
    if l_values is None:
        l_values = range((spec.l_max if spec.l_max is not None else 0) + 1)
    l_values = list(l_values)
    if energy > 0.0:
        return np.zeros(len(l_values))
    pref = 0.5 / abs(energy)
    weights = np.array([(2 * l + 1) / (4.0 * math.pi) for l in l_values])
    r2 = _static_r_squared(g, spec, energy, l_values,
                           _mode_getter(g, cache, method))
    return pref * weights * r2


# Thermal weights of the omega_-+ terms.  The exponent is omega/(2 T_H): the
# literal 2 pi omega form seen in Schwarzschild-era write-ups assumes units
# with T_H = 1/(4 pi), and only the temperature-consistent form reduces to
# the static Hartle-Hawking rate in the b -> 0 limit (and matches the
# e^{+-omega/2T_H} weights of the Hartle-Hawking Wightman function).

def _thermal_factor_minus(a: float, w: float, t_h: float) -> float:
    """e^{w/2T} / (a w sinh(w/2T)) for w > 0, as 2/(a w (1 - e^{-w/T}))."""
    return 2.0 / (a * w * (-math.expm1(-w / t_h)))


def _thermal_factor_plus(a: float, w: float, t_h: float) -> float:
    """e^{-w/2T} / (a w sinh(w/2T)) = 2 / (a w (e^{w/T} - 1))."""
    arg = w / t_h
    if arg > 700.0:
        return 0.0
    return 2.0 / (a * w * math.expm1(arg))


def circular_rate_hh(g: Geometry, spec: DetectorSpec, energy: float, *,
                     l_values=None, cache: Optional[ModeCache] = None,
                     method: str = "auto") -> dict:
    """Per-(l, m) circular-geodesic Hartle-Hawking pieces at gap ``energy``.

    Each (l, m) with l + m even contributes the Theta-gated omega_- and
    omega_+ terms with omega_+- = (m b +- E)/a; the returned dict maps
    (l, m) to the combined nonnegative contribution.

    Raises
    ------
    IntegrableEndpointError
        If some |omega_+-| falls below the zero threshold; the caller decides
        how to move off the endpoint (the grid driver shifts the point).
    """
    spec.validate_against(g)
    if l_values is None:
        l_values = range((spec.l_max if spec.l_max is not None else 0) + 1)
    kin = circular_kinematics(g, spec.r)
    t_h = g.hawking_temperature
    get_mode = _mode_getter(g, cache, method)
    out = {}
    for l in l_values:
        base = (2 * l + 1) / (16.0 * math.pi)
        for m in range(-l, l + 1):
            if (l + m) % 2 == 1:
                continue
            ang = base * _angular_weight(l, m)
            w_minus = (m * kin.b - energy) / kin.a
            w_plus = (m * kin.b + energy) / kin.a
            val = 0.0
            for which, w, factor in (("minus", w_minus, _thermal_factor_minus),
                                     ("plus", w_plus, _thermal_factor_plus)):
                if abs(w) < OMEGA_ZERO_THRESHOLD:
                    raise IntegrableEndpointError(l, m, which, w)
                if w > 0.0:
                    fac = factor(kin.a, w, t_h)
                    if fac != 0.0:
                        val += ang * fac * get_mode(w, l).radial(spec.r) ** 2
            out[(l, m)] = val
    return out


def circular_rate_boulware(g: Geometry, spec: DetectorSpec, energy: float, *,
                           l_values=None, cache: Optional[ModeCache] = None,
                           method: str = "auto") -> dict:
    """Per-(l, m) circular Boulware pieces:
    (1/a) [(l-m)!/(l+m)!] (2l+1)/(8 pi w_-) |P_l^m(0)|^2 Theta(w_-) R^2."""
    spec.validate_against(g)
    if l_values is None:
        l_values = range((spec.l_max if spec.l_max is not None else 0) + 1)
    kin = circular_kinematics(g, spec.r)
    get_mode = _mode_getter(g, cache, method)
    out = {}
    for l in l_values:
        base = (2 * l + 1) / (8.0 * math.pi)
        for m in range(-l, l + 1):
            if (l + m) % 2 == 1:
                continue
            w_minus = (m * kin.b - energy) / kin.a
            if abs(w_minus) < OMEGA_ZERO_THRESHOLD:
                raise IntegrableEndpointError(l, m, "minus", w_minus)
            val = 0.0
            if w_minus > 0.0:
                ang = base * _angular_weight(l, m)
                val = (ang / (kin.a * w_minus)
                       * get_mode(w_minus, l).radial(spec.r) ** 2)
            out[(l, m)] = val
    return out


# ----------------------------------------------------------------------------
# grid accumulation
# ----------------------------------------------------------------------------

POINT_OK = 0
POINT_FAILED = 1
POINT_SHIFTED = 2


@dataclass(eq=False)
class RateCurve:
    """Sampled transition-rate curve with per-l pieces and truncation record.

    ``energies`` is E/T_loc for static detectors and E (units of 1/R) for
    circular ones; shifted endpoint-dodging values appear as adjusted entries
    with ``point_flags`` = POINT_SHIFTED.  ``total`` is exactly the columnwise
    sum of ``per_l``.
    """

    energies: np.ndarray
    energy_unit: str
    per_l: np.ndarray
    total: np.ndarray
    l_values: list
    point_flags: np.ndarray
    truncation: dict
    hawking_temperature: float = math.nan
    evaluator_l: Optional[Callable[[int, float], float]] = field(
        default=None, repr=False)

    def contribution(self, l: int) -> np.ndarray:
        return self.per_l[self.l_values.index(l)]


def _point_energy(spec, g, u):
    """Physical detector gap for one grid value."""
    if spec.trajectory == "static":
        return u * local_temperature(g, spec.r)
    return u


def _row_for_l(g, spec, l, energies, flags, cache, method):
    """Per-l contribution over the grid; honors failure/shift flags."""
    rate_fns = {
        ("static", "hartle_hawking"): static_rate_hh,
        ("static", "boulware"): static_rate_boulware,
    }
    row = np.zeros(energies.size)
    if spec.trajectory == "static":
        fn = rate_fns[(spec.trajectory, spec.vacuum)]
        for i, u in enumerate(energies):
            if flags[i] == POINT_FAILED:
                row[i] = np.nan
                continue
            row[i] = fn(g, spec, _point_energy(spec, g, u),
                        l_values=[l], cache=cache, method=method)[0]
        return row
    fn = (circular_rate_hh if spec.vacuum == "hartle_hawking"
          else circular_rate_boulware)
    for i, u in enumerate(energies):
        if flags[i] == POINT_FAILED:
            row[i] = np.nan
            continue
        pieces = fn(g, spec, u, l_values=[l], cache=cache, method=method)
        row[i] = sum(pieces.values())
    return row


def sum_l(g: Geometry, spec: DetectorSpec, energies, *,
          cache: Optional[ModeCache] = None, method: str = "auto",
          l_ceiling: int = DEFAULT_L_CEILING, row_mapper=None) -> RateCurve:
    """Accumulate per-l contributions over an energy grid.

    With ``spec.l_max`` set, sums exactly l = 0..l_max.  Otherwise extends
    the sum until ``TAIL_RUN`` consecutive multipoles each contribute less
    than ``spec.tail_tolerance`` of the running total at every grid point,
    or attaches a truncated-result warning at ``l_ceiling``.

    Grid points where the rate is undefined (E = 0) are flagged as failures;
    points sitting on an integrable endpoint of the circular sum are shifted
    by half a grid step and flagged.

    ``row_mapper(l, energies, flags) -> row`` may replace the internal
    pointwise evaluation (the CLI passes a process-pool mapper); any mapper
    must be a pure function of its arguments so results stay deterministic.
    """
    spec.validate_against(g)
    cache = cache if cache is not None else default_cache()
    energies = np.array(list(np.asarray(energies, dtype=float)))
    if energies.size < 1:
        raise DomainError("empty energy grid")

    flags = np.zeros(energies.size, dtype=int)
    for i, u in enumerate(energies):
        if spec.trajectory == "static" and u == 0.0:
            flags[i] = POINT_FAILED
    if spec.trajectory == "circular":
        _shift_endpoint_points(g, spec, energies, flags)

    rows = []
    l_values = []
    shifted = energies

    def add_row(l):
        if row_mapper is not None:
            rows.append(np.asarray(row_mapper(l, shifted, flags)))
        else:
            rows.append(_row_for_l(g, spec, l, shifted, flags, cache, method))
        l_values.append(l)

    criterion = None
    if spec.l_max is not None:
        for l in range(spec.l_max + 1):
            add_row(l)
        criterion = "l_max"
    else:
        run = 0
        total = np.zeros(energies.size)
        l = 0
        while l <= l_ceiling:
            add_row(l)
            valid = flags != POINT_FAILED
            total[valid] += rows[-1][valid]
            with np.errstate(invalid="ignore"):
                negligible = np.all(
                    (rows[-1][valid] <= spec.tail_tolerance * total[valid])
                    | (rows[-1][valid] == 0.0))
            run = run + 1 if negligible else 0
            if run >= TAIL_RUN:
                criterion = "tail"
                break
            l += 1
        if criterion is None:
            criterion = "ceiling"
            warnings.warn(
                f"multipole sum truncated at l={l_ceiling} before the tail "
                f"criterion was met", RuntimeWarning)

    per_l = np.vstack(rows)
    total = per_l.sum(axis=0)
    truncation = {"criterion": criterion, "l_stop": l_values[-1],
                  "tail_tolerance": spec.tail_tolerance,
                  "failed_points": list(np.nonzero(flags == POINT_FAILED)[0]),
                  "shifted_points": list(np.nonzero(flags == POINT_SHIFTED)[0])}

    def evaluator_l(l, u):
        row = _row_for_l(g, spec, l, np.array([float(u)]),
                         np.zeros(1, dtype=int), cache, method)
        return float(row[0])

    return RateCurve(energies=shifted, energy_unit=(
        "E_over_Tloc" if spec.trajectory == "static" else "E_R"),
        per_l=per_l, total=total, l_values=l_values, point_flags=flags,
        truncation=truncation, hawking_temperature=g.hawking_temperature,
        evaluator_l=evaluator_l)


def _shift_endpoint_points(g, spec, energies, flags):
    """Move circular grid points off integrable endpoints (|w_+-| ~ 0).

    omega_+- = (m b +- E)/a vanishes when E = -+ m b, so a point is moved a
    half-step when any |E -+ m b| is below threshold for an m it couples to.
    """
    kin = circular_kinematics(g, spec.r)
    l_probe = spec.l_max if spec.l_max is not None else DEFAULT_L_CEILING
    scale = kin.a * OMEGA_ZERO_THRESHOLD
    for i, u in enumerate(energies):
        clash = any(abs(u - s * m * kin.b) < scale
                    for m in range(0, l_probe + 1) for s in (1.0, -1.0))
        if not clash:
            continue
        if energies.size > 1:
            j = i + 1 if i + 1 < energies.size else i - 1
            half = 0.5 * abs(energies[j] - energies[i])
        else:
            half = max(1e-6, 1e-6 * abs(u))
        energies[i] = u + half
        flags[i] = POINT_SHIFTED
