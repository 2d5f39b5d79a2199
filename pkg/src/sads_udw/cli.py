"""Command-line surface: sweep orchestration, CSV export, and run manifests.

Tasks mirror the study's figures: ``static-rate`` and ``circular-rate``
produce total and per-l transition-rate curves, ``scan-peaks`` and
``peak-fit`` the resonance-location data, ``wkb`` the scattering
coefficients, and ``mode`` a single radial mode profile.

Data files are deterministic: identical configs produce byte-identical CSVs
regardless of worker count (rows are computed pointwise and written in grid
order; timing lives only in the manifest).
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from . import analysis, response
from .errors import DomainError
from .geometry import make_geometry
from .modecache import ModeCache

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_ALL_FAILED = 4

_VACUA = {"hh": ["hartle_hawking"], "boulware": ["boulware"],
          "both": ["hartle_hawking", "boulware"]}


@dataclass
class RunConfig:
    """Validated run parameters (config file merged with CLI overrides)."""

    task: str
    r_plus: float
    out: str
    radius: Optional[float] = None
    radius_ratio: Optional[float] = None
    vacuum: str = "hh"
    e_min: float = -40.0
    e_max: float = 40.0
    e_count: int = 2001
    e_scale: str = "lin"
    l_max: Optional[int] = 4
    l_adaptive: Optional[float] = None
    method: str = "auto"
    workers: int = 1
    omega: Optional[float] = None
    l: int = 0
    peak_n: int = 0
    r_plus_list: Optional[str] = None
    refine_rel: float = 1e-10
    no_disk_cache: bool = False

    def validate(self):
        if self.r_plus <= 0.0:
            raise DomainError("r-plus must be positive")
        if self.e_count < 2:
            raise DomainError("e-count must be at least 2")
        if not self.e_min < self.e_max:
            raise DomainError("need e-min < e-max")
        if self.e_scale not in ("lin", "log"):
            raise DomainError("e-scale must be lin or log")
        if self.e_scale == "log" and self.e_min <= 0.0:
            raise DomainError("log energy grids need e-min > 0")
        if self.vacuum not in _VACUA:
            raise DomainError("vacuum must be hh, boulware, or both")
        if self.method not in ("series", "wronskian", "auto"):
            raise DomainError("unknown solver method")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if self.l_adaptive is not None and self.l_adaptive <= 0.0:
            raise DomainError("l-adaptive tolerance must be positive")
        if self.radius is not None and self.radius_ratio is not None:
            raise DomainError("give either radius or radius-ratio, not both")

    def detector_radius(self, r_plus=None) -> float:
        r_plus = self.r_plus if r_plus is None else r_plus
        if self.radius is not None:
            return self.radius
        ratio = self.radius_ratio if self.radius_ratio is not None else 10.0
        return ratio * r_plus

    def r_plus_values(self):
        if self.r_plus_list:
            return [float(tok) for tok in self.r_plus_list.split(",") if tok]
        return [self.r_plus]

    def echo(self, data_only: bool = False) -> dict:
        """Config as a sorted dict; ``data_only`` drops fields that cannot
        affect computed values (scheduling and paths), so data-file headers
        stay byte-identical across worker counts and output locations."""
        skip = {"workers", "out", "no_disk_cache"} if data_only else set()
        out = {}
        for key, val in sorted(vars(self).items()):
            if key not in skip:
                out[key] = val
        return out


def energy_grid(cfg: RunConfig) -> np.ndarray:
    """Build the energy grid; symmetric linear grids are mirrored exactly so
    +-E pairs are bitwise negatives of each other (the KMS identity then
    holds on shared modes with no grid round-off)."""
    if cfg.e_scale == "log":
        return np.geomspace(cfg.e_min, cfg.e_max, cfg.e_count)
    if cfg.e_min == -cfg.e_max and cfg.e_count % 2 == 1:
        half = np.linspace(0.0, cfg.e_max, (cfg.e_count + 1) // 2)
        return np.concatenate([-half[:0:-1], half])
    return np.linspace(cfg.e_min, cfg.e_max, cfg.e_count)


# ----------------------------------------------------------------------------
# parallel row mapping
# ----------------------------------------------------------------------------

_worker_state: dict = {}


def _worker_init(cache_dir):
    _worker_state["cache"] = ModeCache(disk_dir=cache_dir)


def _worker_chunk(args):
    (r_plus, spec_fields, l, energies, flags, method) = args
    g = make_geometry(r_plus)
    spec = response.DetectorSpec(**spec_fields)
    cache = _worker_state.get("cache") or ModeCache()
    row = response._row_for_l(g, spec, l, np.asarray(energies),
                              np.asarray(flags), cache, method)
    return row, cache.stats()


class ParallelRowMapper:
    """Maps per-l rows over the energy grid with a process pool.

    Chunk boundaries cannot change any value: every grid point is computed
    by the same pure function of (geometry, spec, l, energy).
    """

    def __init__(self, g, spec, method, workers, cache_dir):
        self.g = g
        self.spec_fields = dict(trajectory=spec.trajectory, r=spec.r,
                                vacuum=spec.vacuum, l_max=spec.l_max,
                                tail_tolerance=spec.tail_tolerance)
        self.method = method
        self.workers = workers
        self.cache_dir = cache_dir
        self.worker_stats: list = []
        self._pool = concurrent.futures.ProcessPoolExecutor(
            max_workers=workers, initializer=_worker_init,
            initargs=(cache_dir,))

    def __call__(self, l, energies, flags):
        chunks = np.array_split(np.arange(energies.size), self.workers)
        jobs = []
        for chunk in chunks:
            if chunk.size == 0:
                continue
            jobs.append(self._pool.submit(
                _worker_chunk,
                (self.g.r_plus, self.spec_fields, l,
                 energies[chunk].tolist(), flags[chunk].tolist(),
                 self.method)))
        rows = []
        for job in jobs:
            row, stats = job.result()
            rows.append(row)
            self.worker_stats.append(stats)
        return np.concatenate(rows)

    def close(self):
        self._pool.shutdown()


# ----------------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path, cfg: RunConfig, columns, rows, extra_header=()):
    lines = ["# sads-udw v" + __version__,
             "# units: canonical AdS radius R = 1"]
    for key, val in cfg.echo(data_only=True).items():
        lines.append(f"# {key} = {val}")
    for item in extra_header:
        lines.append(f"# {item}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(payload)
    return hashlib.sha256(payload.encode()).hexdigest()


def _rate_files(cfg: RunConfig, g, out_dir, cache, mapper_factory):
    trajectory = "static" if cfg.task == "static-rate" else "circular"
    energies = energy_grid(cfg)
    l_max = None if cfg.l_adaptive is not None else cfg.l_max
    tail = cfg.l_adaptive if cfg.l_adaptive is not None else 1e-4
    files = {}
    n_failed = 0
    n_points = 0
    truncation = {}
    for vacuum in _VACUA[cfg.vacuum]:
        spec = response.DetectorSpec(trajectory, cfg.detector_radius(),
                                     vacuum, l_max=l_max, tail_tolerance=tail)
        mapper = mapper_factory(spec)
        try:
            curve = response.sum_l(g, spec, energies, cache=cache,
                                   method=cfg.method, row_mapper=mapper)
        finally:
            if hasattr(mapper, "close"):
                mapper.close()
        short = "hh" if vacuum == "hartle_hawking" else "boulware"
        name = f"{cfg.task.replace('-', '_')}_{short}.csv"
        columns = ([curve.energy_unit, "total_rate"]
                   + [f"rate_l{l}" for l in curve.l_values]
                   + ["truncation_flag"])
        rows = []
        for i in range(curve.energies.size):
            rows.append([curve.energies[i], curve.total[i]]
                        + [curve.per_l[j, i] for j in range(len(curve.l_values))]
                        + [int(curve.point_flags[i])])
        digest = _write_csv(
            os.path.join(out_dir, name), cfg, columns, rows,
            extra_header=[f"truncation = {curve.truncation['criterion']} "
                          f"at l = {curve.truncation['l_stop']}"])
        files[name] = digest
        n_failed += len(curve.truncation["failed_points"])
        n_points += curve.energies.size
        truncation[short] = {k: v for k, v in curve.truncation.items()
                             if k != "tail_tolerance"}
        truncation[short]["failed_points"] = [
            int(i) for i in truncation[short]["failed_points"]]
        truncation[short]["shifted_points"] = [
            int(i) for i in truncation[short]["shifted_points"]]
    return files, n_failed, n_points, truncation


def _mode_file(cfg: RunConfig, g, out_dir, cache):
    if cfg.omega is None:
        raise DomainError("mode task requires --omega")
    mode = cache.get(g, cfg.omega, cfg.l, method=cfg.method)
    r_lo = g.r_plus * 1.000001
    r_hi = mode.r_max
    radii = np.geomspace(r_lo, r_hi, max(cfg.e_count, 2))
    rows = []
    for r in radii:
        rt = mode.radial_tilde(r)
        rows.append([r, g.tortoise(r), rt / r, rt])
    name = "mode.csv"
    digest = _write_csv(os.path.join(out_dir, name), cfg,
                        ["r", "r_star", "R", "R_tilde"], rows,
                        extra_header=[f"theta0 = {_fmt(mode.theta0)}",
                                      f"method = {mode.method}",
                                      "normalization_residual = "
                                      + _fmt(mode.normalization_residual)])
    return {name: digest}, 0, len(rows), {}


def _scan_peaks_file(cfg: RunConfig, out_dir, cache):
    rows = []
    n_failed = 0
    for rp in cfg.r_plus_values():
        g = make_geometry(rp)
        spec = response.DetectorSpec("static", cfg.detector_radius(rp),
                                     "hartle_hawking", l_max=cfg.l)
        energies = energy_grid(cfg) / g.hawking_temperature
        curve = response.sum_l(g, spec, energies, cache=cache,
                               method=cfg.method)
        peaks = analysis.scan_peaks(curve, cfg.l, refine_rel=cfg.refine_rel)
        if not peaks:
            n_failed += 1
        for p in peaks:
            rows.append([rp, p.l, p.n, p.e_over_tloc, p.omega_tilde_r,
                         p.height, p.half_width])
    name = "scan_peaks.csv"
    digest = _write_csv(os.path.join(out_dir, name), cfg,
                        ["r_plus", "l", "n", "E_over_Tloc", "omega_tilde_R",
                         "height", "half_width"], rows)
    return {name: digest}, n_failed, len(cfg.r_plus_values()), {}


def _peak_fit_file(cfg: RunConfig, out_dir, cache):
    ratio = (cfg.radius_ratio if cfg.radius_ratio is not None else 10.0)
    fit = analysis.peak_vs_rplus(cfg.l, cfg.peak_n, cfg.r_plus_values(),
                                 ratio, cache=cache,
                                 refine_rel=cfg.refine_rel)
    rows = []
    for rp, om in zip(fit.r_plus, fit.omega_tilde):
        pred = fit.c0 + fit.c1 * rp + fit.c2 * rp * rp
        rows.append([rp, om, pred, om - pred, 0])
    for rp in fit.flagged:
        rows.append([rp, math.nan, math.nan, math.nan, 1])
    name = "peak_fit.csv"
    digest = _write_csv(
        os.path.join(out_dir, name), cfg,
        ["r_plus", "omega_tilde_R", "fit", "residual", "no_peak_flag"],
        rows,
        extra_header=[f"c0 = {_fmt(fit.c0)}", f"c1 = {_fmt(fit.c1)}",
                      f"c2 = {_fmt(fit.c2)}",
                      f"residual_norm = {_fmt(fit.residual_norm)}"])
    return {name: digest}, len(fit.flagged), len(cfg.r_plus_values()), {}


def _wkb_file(cfg: RunConfig, g, out_dir):
    omegas = energy_grid(cfg)
    rows = []
    n_failed = 0
    for om in omegas:
        try:
            sc = analysis.wkb_scatter(g, float(om), cfg.l)
            rows.append([sc.omega, sc.l, sc.a_refl.real, sc.a_refl.imag,
                         abs(sc.a_refl), sc.b_trans.real, sc.b_trans.imag,
                         abs(sc.b_trans), sc.c, sc.flux_defect,
                         sc.wkb_validity, 0])
        except Exception:
            n_failed += 1
            rows.append([float(om), cfg.l] + [math.nan] * 9 + [1])
    name = "wkb.csv"
    digest = _write_csv(
        os.path.join(out_dir, name), cfg,
        ["omega", "l", "re_A", "im_A", "abs_A", "re_B", "im_B", "abs_B",
         "C", "flux_defect", "wkb_validity", "failure_flag"], rows)
    return {name: digest}, n_failed, len(omegas), {}


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sads-udw",
        description="Detector transition rates and radial modes on "
                    "Schwarzschild-AdS backgrounds (canonical units R = 1).")
    parser.add_argument("task", choices=["mode", "static-rate",
                                         "circular-rate", "scan-peaks",
                                         "peak-fit", "wkb"])
    parser.add_argument("--config", help="key=value file; CLI flags override")
    parser.add_argument("--r-plus", type=float, dest="r_plus")
    parser.add_argument("--radius", type=float)
    parser.add_argument("--radius-ratio", type=float, dest="radius_ratio")
    parser.add_argument("--vacuum", choices=list(_VACUA), default=None)
    parser.add_argument("--e-min", type=float, dest="e_min")
    parser.add_argument("--e-max", type=float, dest="e_max")
    parser.add_argument("--e-count", type=int, dest="e_count")
    parser.add_argument("--e-scale", choices=["lin", "log"], dest="e_scale")
    parser.add_argument("--l-max", type=int, dest="l_max")
    parser.add_argument("--l-adaptive", type=float, dest="l_adaptive",
                        help="adaptive multipole sum with this tail tolerance")
    parser.add_argument("--method", choices=["series", "wronskian", "auto"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--omega", type=float)
    parser.add_argument("--l", type=int)
    parser.add_argument("--peak-n", type=int, dest="peak_n")
    parser.add_argument("--r-plus-list", dest="r_plus_list",
                        help="comma-separated horizon radii for sweep tasks")
    parser.add_argument("--refine-rel", type=float, dest="refine_rel")
    parser.add_argument("--no-disk-cache", action="store_true",
                        dest="no_disk_cache")
    parser.add_argument("--out", required=False)
    return parser


def _read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"bad config line: {raw.strip()!r}")
            key, val = (tok.strip() for tok in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _coerce(key, val):
    target = {"r_plus": float, "radius": float, "radius_ratio": float,
              "e_min": float, "e_max": float, "e_count": int, "l_max": int,
              "l_adaptive": float, "workers": int, "omega": float, "l": int,
              "peak_n": int, "refine_rel": float,
              "no_disk_cache": lambda s: s.lower() in ("1", "true", "yes"),
              }.get(key, str)
    return target(val)


def load_config(argv) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    merged = {}
    if args.config:
        for key, val in _read_config_file(args.config).items():
            if key not in RunConfig.__dataclass_fields__:
                raise DomainError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, val)
    for key in RunConfig.__dataclass_fields__:
        cli_val = getattr(args, key, None)
        if cli_val is not None and cli_val is not False:
            merged[key] = cli_val
    merged["task"] = args.task
    if "r_plus" not in merged:
        raise DomainError("r-plus is required (flag or config file)")
    if "out" not in merged or not merged["out"]:
        raise DomainError("out directory is required")
    cfg = RunConfig(**merged)
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    """Execute a validated config; writes data files plus manifest.json."""
    os.makedirs(cfg.out, exist_ok=True)
    cache_dir = (None if cfg.no_disk_cache
                 else os.path.join(cfg.out, "mode-cache"))
    cache = ModeCache(disk_dir=cache_dir)
    g = make_geometry(cfg.r_plus)
    t0 = time.perf_counter()

    def mapper_factory(spec):
        if cfg.workers > 1:
            return ParallelRowMapper(g, spec, cfg.method, cfg.workers,
                                     cache_dir)
        return None

    if cfg.task in ("static-rate", "circular-rate"):
        files, n_failed, n_points, trunc = _rate_files(
            cfg, g, cfg.out, cache, mapper_factory)
    elif cfg.task == "mode":
        files, n_failed, n_points, trunc = _mode_file(cfg, g, cfg.out, cache)
    elif cfg.task == "scan-peaks":
        files, n_failed, n_points, trunc = _scan_peaks_file(cfg, cfg.out,
                                                            cache)
    elif cfg.task == "peak-fit":
        files, n_failed, n_points, trunc = _peak_fit_file(cfg, cfg.out, cache)
    else:
        files, n_failed, n_points, trunc = _wkb_file(cfg, g, cfg.out)

    manifest = {
        "config": {k: (v if not isinstance(v, float) else float(_fmt(v)))
                   for k, v in cfg.echo().items()},
        "version": __version__,
        "timing_seconds": time.perf_counter() - t0,
        "files": files,
        "points": {"total": int(n_points), "failed": int(n_failed)},
        "truncation": trunc,
        "cache": cache.stats(),
    }
    with open(os.path.join(cfg.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if n_points == 0 or n_failed == 0:
        return EXIT_OK
    if n_failed >= n_points:
        return EXIT_ALL_FAILED
    return EXIT_PARTIAL


def main(argv=None) -> int:
    try:
        cfg = load_config(sys.argv[1:] if argv is None else argv)
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
