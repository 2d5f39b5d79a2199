"""Transition rates of Unruh-DeWitt detectors on Schwarzschild-AdS
backgrounds, with the radial-mode solvers and resonance analysis behind
them.  Canonical units fix the AdS radius to 1.
"""

__version__ = "0.1.0"

from .geometry import (CircularKinematics, Geometry, ScalingReport,
                       circular_kinematics, lapse, local_temperature,
                       make_geometry, pure_ads_geometry, r_plus_from_r0,
                       rescale, tortoise)
from .radial import (ModeKey, PhysicalMode, SeriesSolution, build_series,
                     effective_potential, physical_mode, potential,
                     theta0_series, theta0_wronskian)
from .response import (DetectorSpec, RateCurve, circular_rate_boulware,
                       circular_rate_hh, legendre_at_zero,
                       static_rate_boulware, static_rate_hh, sum_l)
from .analysis import (FitResult, PeakRecord, ScatterData, ads_normal_mode,
                       peak_coefficient, peak_vs_rplus, scan_peaks,
                       wkb_scatter)
from .modecache import ModeCache, default_cache

__all__ = [
    "__version__",
    "Geometry", "CircularKinematics", "ScalingReport",
    "make_geometry", "pure_ads_geometry", "lapse", "tortoise",
    "circular_kinematics", "local_temperature", "rescale", "r_plus_from_r0",
    "ModeKey", "SeriesSolution", "PhysicalMode",
    "potential", "effective_potential", "build_series",
    "theta0_series", "theta0_wronskian", "physical_mode",
    "DetectorSpec", "RateCurve", "legendre_at_zero",
    "static_rate_hh", "static_rate_boulware",
    "circular_rate_hh", "circular_rate_boulware", "sum_l",
    "ScatterData", "PeakRecord", "FitResult",
    "wkb_scatter", "peak_coefficient", "scan_peaks", "ads_normal_mode",
    "peak_vs_rplus",
    "ModeCache", "default_cache",
]
