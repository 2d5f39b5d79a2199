"""Resonance-peak analysis: one-dimensional scattering coefficients, the
peak-enhancement coefficient, peak scanning with refinement, empty-AdS
normal modes, and peak-frequency fits against horizon size.

The transition-rate spikes sit where the reflection amplitude A approaches
-1; the coefficient C = |B| / |A + 1| quantifies the boundary amplitude of
the physical mode relative to its near-horizon normalization and explains
why peaks sharpen as |A| -> 1 and die as |A| -> 0 at high frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import radial
from .errors import (AccuracyError, DomainError, InsufficientDataError,
                     OutOfRegimeError)
from .geometry import Geometry, make_geometry, local_temperature
from .modecache import ModeCache
from .response import DetectorSpec, RateCurve, sum_l

__all__ = [
    "ScatterData",
    "PeakRecord",
    "FitResult",
    "wkb_scatter",
    "peak_coefficient",
    "scan_peaks",
    "ads_normal_mode",
    "peak_vs_rplus",
]

MATCHING_RESIDUAL_TOL = 1e-6
PEAK_BASELINE_FACTOR = 1.5      # peak must clear 1.5x the exponential trend
REFINE_REL_DEFAULT = 1e-12


@dataclass(frozen=True)
class ScatterData:
    """Reflection/transmission data of the radial scattering problem.

    An incident flux-normalized wave comes in from the boundary; ``a_refl``
    and ``b_trans`` are the reflection and transmission amplitudes, ``c``
    the peak coefficient |B|/|A+1|, and ``wkb_validity`` the largest
    |k'(r*)|/k^2(r*) seen over the matching windows (small means the
    plane-wave forms used for matching are trustworthy).
    """

    omega: float
    l: int
    omega_prime: float
    a_refl: complex
    b_trans: complex
    c: float
    wkb_validity: float
    matching_residual: float
    flux_defect: float          # | |A|^2 + |B|^2 - 1 |
    window_fraction: float      # of the r* range used for boundary matching

    @property
    def flux_sum(self) -> float:
        return abs(self.a_refl) ** 2 + abs(self.b_trans) ** 2


@dataclass(frozen=True)
class PeakRecord:
    """One resonance peak of a per-l static rate contribution."""

    l: int
    n: int
    e_over_tloc: float
    omega_tilde_r: float
    height: float
    half_width: float


@dataclass(frozen=True)
class FitResult:
    """Quadratic fit of peak mode frequency against horizon radius."""

    c0: float
    c1: float
    c2: float
    residual_norm: float
    r_plus: tuple
    omega_tilde: tuple
    flagged: tuple              # r_plus values whose peak was not found


def ads_normal_mode(l: int, n: int) -> float:
    """Normal-mode frequency omega R = 2 + l + 2n of the conformal scalar in
    empty AdS with Dirichlet walls.

    (The minimally coupled tower sits at 3 + l + 2n instead; peaks of the
    small-horizon response converge to the conformal values.)
    """
    if l < 0 or n < 0:
        raise DomainError("l and n must be nonnegative")
    return float(2 + l + 2 * n)


def peak_coefficient(a_refl: complex, b_trans: complex) -> float:
    """Amplitude-enhancement coefficient C = |B| / |A + 1|.

    Returns ``inf`` when A = -1 exactly (the infinite-peak signal); local
    maxima along a frequency sweep occur where A is negative real, minima
    where it is positive real.
    """
    a_refl = complex(a_refl)
    b_trans = complex(b_trans)
    if not (math.isfinite(a_refl.real) and math.isfinite(a_refl.imag)
            and math.isfinite(b_trans.real) and math.isfinite(b_trans.imag)):
        raise DomainError("amplitudes must be finite")
    denom = abs(a_refl + 1.0)
    if denom == 0.0:
        return math.inf
    return abs(b_trans) / denom


# ----------------------------------------------------------------------------
# scattering
# ----------------------------------------------------------------------------

def _validity_figure(g: Geometry, omega: float, vl: float, x) -> float:
    """max |k'(r*)| / k^2 over the given inverse radii (requires k^2 > 0)."""
    x = np.asarray(x, dtype=float)
    gg = g.xsq_lapse(x)
    vt = gg * (vl + g.r0 * x)
    k2 = omega * omega - vt
    k2 = np.where(k2 > 0.0, k2, np.nan)
    vt_x = (2.0 * x - 3.0 * g.r0 * x * x) * (vl + g.r0 * x) + gg * g.r0
    figure = gg * np.abs(vt_x) / (2.0 * k2 ** 1.5)
    return float(np.nanmax(figure))


def wkb_scatter(g: Geometry, omega: float, l: int, *,
                n_window: int = 33,
                residual_tol: float = MATCHING_RESIDUAL_TOL) -> ScatterData:
    """Solve the scattering problem and extract (A, B, C).

    The in-mode (unit amplitude, purely ingoing at the horizon) is
    propagated to the boundary cut and least-squares matched there against
    alpha e^{-i omega' r*} + beta e^{i omega' r*} over the outer 5% of the
    r* range; then A = beta/alpha and B = sqrt(omega/omega')/alpha.  The
    window is halved (up to four times) if the matching residual exceeds
    ``residual_tol``, since the plane-wave forms only hold asymptotically.

    Raises
    ------
    OutOfRegimeError
        If omega^2 <= l(l+1), where no propagating boundary wave exists.
    AccuracyError
        If the matching residual stays above ``residual_tol``.
    """
    vl = float(l * (l + 1))
    if not omega * omega > vl:
        raise OutOfRegimeError(
            f"omega^2 = {omega * omega:g} must exceed l(l+1) = {vl:g}")
    omega_prime = math.sqrt(omega * omega - vl)

    branch, _, rs_seed, rs_bound = radial.propagate_in_mode(g, omega, l)

    fraction = 0.05
    result = None
    for _ in range(5):
        t_lo = fraction * rs_seed
        samples = np.linspace(t_lo, rs_bound, n_window)
        y = branch.y_at(samples)
        p = branch.p_at(samples)
        basis_in = np.exp(-1.0j * omega_prime * samples)
        basis_out = np.exp(1.0j * omega_prime * samples)
        design = np.zeros((2 * n_window, 2), dtype=np.complex128)
        data = np.zeros(2 * n_window, dtype=np.complex128)
        design[:n_window, 0] = basis_in
        design[:n_window, 1] = basis_out
        data[:n_window] = y
        design[n_window:, 0] = -1.0j * basis_in
        design[n_window:, 1] = 1.0j * basis_out
        data[n_window:] = p / omega_prime
        coeffs, *_ = np.linalg.lstsq(design, data, rcond=None)
        resid = float(np.linalg.norm(design @ coeffs - data)
                      / max(np.linalg.norm(data), 1e-300))
        result = (coeffs, resid, fraction, samples)
        if resid <= residual_tol:
            break
        fraction *= 0.5
    coeffs, resid, fraction, samples = result
    if resid > residual_tol:
        raise AccuracyError(
            f"plane-wave matching residual {resid:.3e} exceeds "
            f"{residual_tol:g} (omega={omega:g}, l={l})")

    alpha, beta = complex(coeffs[0]), complex(coeffs[1])
    a_refl = beta / alpha
    b_trans = math.sqrt(omega / omega_prime) / alpha

    # Validity figure over the boundary matching window.  The horizon end
    # needs no plane-wave matching (the in-mode is seeded exactly from its
    # horizon series where the effective potential vanishes), so the budget
    # is set by the boundary side and approaches r0/(2 omega'^3) as r* -> 0.
    x_window = np.interp(samples, branch.ts, branch.xs)
    validity = _validity_figure(g, omega, vl, x_window)

    flux_defect = abs(abs(a_refl) ** 2 + abs(b_trans) ** 2 - 1.0)
    return ScatterData(omega=omega, l=l, omega_prime=omega_prime,
                       a_refl=a_refl, b_trans=b_trans,
                       c=peak_coefficient(a_refl, b_trans),
                       wkb_validity=validity, matching_residual=resid,
                       flux_defect=flux_defect, window_fraction=fraction)


# ----------------------------------------------------------------------------
# peak scanning
# ----------------------------------------------------------------------------

def _golden_max(f, a, b, rel_tol):
    """Golden-section maximization on [a, b] to relative abscissa ``rel_tol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(300):
        if (b - a) <= rel_tol * max(abs(a), abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def _exponential_baseline(energies, values, i_peak, exclude=2, window=8):
    """Local exponential-trend level at the peak, from a log-linear fit over
    neighbors excluding the peak's immediate vicinity; NaN if unfittable."""
    idx = []
    for j in range(max(0, i_peak - window), min(len(values), i_peak + window + 1)):
        if abs(j - i_peak) > exclude and values[j] > 0.0 \
                and math.isfinite(values[j]):
            idx.append(j)
    if len(idx) < 4:
        return math.nan
    u = energies[idx]
    logv = np.log(values[idx])
    slope, intercept = np.polyfit(u, logv, 1)
    return float(np.exp(intercept + slope * energies[i_peak]))


def _half_width(f, u_peak, height, u_lo, u_hi):
    """Half width at half maximum by bisection on each side; NaN if either
    side never drops below height/2 inside the bracket."""
    target = 0.5 * height
    widths = []
    for u_edge in (u_lo, u_hi):
        lo, hi = u_peak, u_edge
        if f(u_edge) > target:
            return math.nan
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if f(mid) > target:
                lo = mid
            else:
                hi = mid
        widths.append(abs(0.5 * (lo + hi) - u_peak))
    return float(0.5 * (widths[0] + widths[1]))


def scan_peaks(curve: RateCurve, l: int, *,
               refine_rel: float = REFINE_REL_DEFAULT,
               baseline_factor: float = PEAK_BASELINE_FACTOR,
               compute_widths: bool = True) -> list:
    """Locate resonance peaks of the per-l contribution of a static curve.

    Grid maxima are refined by golden-section search on the curve's
    underlying evaluator (to relative energy precision ``refine_rel``), then
    filtered against the local exponential-decay baseline: a maximum counts
    as a peak only if it clears ``baseline_factor`` times the trend.  An
    empty list simply means no peaks; it is not an error.
    """
    if curve.energy_unit != "E_over_Tloc":
        raise DomainError("peak scanning is defined for static rate curves")
    if curve.evaluator_l is None:
        raise DomainError("curve carries no refinable evaluator")
    u = curve.energies
    y = curve.contribution(l)

    records = []
    n_found = 0
    for i in range(1, len(u) - 1):
        if not (math.isfinite(y[i]) and y[i] > 0.0):
            continue
        if not (y[i] > y[i - 1] and y[i] >= y[i + 1]):
            continue
        f = lambda uu: curve.evaluator_l(l, uu)
        u_pk, h_pk = _golden_max(f, u[i - 1], u[i + 1], refine_rel)
        baseline = _exponential_baseline(u, y, i)
        if math.isfinite(baseline) and not h_pk >= baseline_factor * baseline:
            continue
        hw = (_half_width(f, u_pk, h_pk, u[i - 1], u[i + 1])
              if compute_widths else math.nan)
        records.append((u_pk, h_pk, hw))
        n_found += 1

    t_h = curve.hawking_temperature
    out = []
    for n, (u_pk, h_pk, hw) in enumerate(sorted(records)):
        out.append(PeakRecord(l=l, n=n, e_over_tloc=float(u_pk),
                              omega_tilde_r=float(t_h * u_pk),
                              height=float(h_pk), half_width=hw))
    return out


def peak_vs_rplus(l: int, n: int, r_plus_values, radius_ratio: float, *,
                  omega_window: Optional[tuple] = None,
                  grid_points: int = 240,
                  refine_rel: float = 1e-10,
                  cache: Optional[ModeCache] = None) -> FitResult:
    """Quadratic fit of the (l, n) peak frequency against horizon radius.

    For each r_plus the detector sits at ``radius_ratio * r_plus`` and the
    per-l static contribution is scanned over ``omega_window`` (defaults to
    a band around the empty-AdS value 2 + l + 2n).  Samples whose peak has
    vanished are flagged and excluded from the unweighted least-squares fit
    omega_tilde ~ c0 + c1 r_plus + c2 r_plus^2.

    Raises
    ------
    InsufficientDataError
        If fewer than four samples retain a peak.
    """
    r_plus_values = [float(rp) for rp in r_plus_values]
    if omega_window is None:
        center = ads_normal_mode(l, n)
        omega_window = (max(0.3 * center, center - 1.0), center + 1.5)

    kept_rp, kept_om, flagged = [], [], []
    for rp in r_plus_values:
        g = make_geometry(rp)
        spec = DetectorSpec("static", radius_ratio * rp, "hartle_hawking",
                            l_max=l)
        t_h = g.hawking_temperature
        u_grid = np.linspace(omega_window[0] / t_h, omega_window[1] / t_h,
                             grid_points)
        curve = sum_l(g, spec, u_grid, cache=cache)
        peaks = scan_peaks(curve, l, refine_rel=refine_rel,
                           compute_widths=False)
        if len(peaks) <= n:
            flagged.append(rp)
            continue
        kept_rp.append(rp)
        kept_om.append(peaks[n].omega_tilde_r)

    if len(kept_rp) < 4:
        raise InsufficientDataError(
            f"only {len(kept_rp)} of {len(r_plus_values)} samples retain the "
            f"(l={l}, n={n}) peak; need at least 4")
    coeffs = np.polyfit(kept_rp, kept_om, 2)
    c2, c1, c0 = (float(c) for c in coeffs)
    fit = np.polyval(coeffs, kept_rp)
    residual_norm = float(np.linalg.norm(np.asarray(kept_om) - fit))
    return FitResult(c0=c0, c1=c1, c2=c2, residual_norm=residual_norm,
                     r_plus=tuple(kept_rp), omega_tilde=tuple(kept_om),
                     flagged=tuple(flagged))
