"""Process-wide physical-mode cache with an optional on-disk layer.

Modes are deterministic functions of (r_plus, omega, l, method, tolerances),
so equal keys are interchangeable and concurrent insert/lookup follows
last-writer-wins.  The disk layer is content-addressed: the key is hashed to
a file name and payloads are pickled whole (every mode payload is plain
arrays and floats).  A corrupt entry is recomputed and overwritten with a
warning, never trusted.
"""
from __future__ import annotations

import hashlib
import json
import os
import pickle
import tempfile
import threading
import warnings
from typing import Optional

from . import radial
from .geometry import Geometry, make_geometry
from .radial import PhysicalMode

__all__ = ["ModeCache", "default_cache", "mode_tolerances"]


def mode_tolerances() -> tuple:
    """The solver settings that parameterize a mode, in key order."""
    return (radial.SEED_DELTA, radial.BOUNDARY_ETA, radial.ODE_RTOL,
            radial.ODE_ATOL, radial.PHASE_TOL, radial.N_SCHEDULE_MAX)


class ModeCache:
    """Memoizes :func:`sads_udw.radial.physical_mode` results."""

    def __init__(self, disk_dir: Optional[str] = None):
        self._mem: dict = {}
        self._lock = threading.Lock()
        self.disk_dir = disk_dir
        if disk_dir is not None:
            os.makedirs(disk_dir, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self.disk_hits = 0

    @staticmethod
    def key(g: Geometry, omega: float, l: int, method: str) -> tuple:
        return (float(g.r_plus), float(omega), int(l), str(method),
                mode_tolerances())

    def get(self, g: Geometry, omega: float, l: int,
            method: str = "auto") -> PhysicalMode:
        """Cached physical mode; computes, stores, and returns on a miss."""
        k = self.key(g, omega, l, method)
        with self._lock:
            mode = self._mem.get(k)
        if mode is not None:
            self.hits += 1
            return mode
        mode = self._load_disk(k)
        if mode is None:
            self.misses += 1
            mode = radial.physical_mode(g, omega, l, method=method)
            self._store_disk(k, mode)
        else:
            self.disk_hits += 1
        with self._lock:
            self._mem[k] = mode
        return mode

    def clear_memory(self):
        with self._lock:
            self._mem.clear()

    def stats(self) -> dict:
        return {"hits": self.hits, "misses": self.misses,
                "disk_hits": self.disk_hits, "entries": len(self._mem)}

    # -- disk layer ----------------------------------------------------------

    def _path(self, key: tuple) -> str:
        blob = json.dumps([repr(part) for part in key]).encode()
        return os.path.join(self.disk_dir,
                            hashlib.sha256(blob).hexdigest() + ".pkl")

    def _load_disk(self, key: tuple) -> Optional[PhysicalMode]:
        if self.disk_dir is None:
            return None
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "rb") as fh:
                return pickle.load(fh)
        except Exception as exc:
            warnings.warn(f"mode cache entry {path} unreadable ({exc}); "
                          "recomputing", RuntimeWarning)
            return None

    def _store_disk(self, key: tuple, mode: PhysicalMode):
        if self.disk_dir is None:
            return
        path = self._path(key)
        fd, tmp = tempfile.mkstemp(dir=self.disk_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                pickle.dump(mode, fh)
            os.replace(tmp, path)
        except Exception:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


_default: Optional[ModeCache] = None
_default_lock = threading.Lock()


def default_cache() -> ModeCache:
    """The shared in-memory cache used when callers pass none."""
    global _default
    with _default_lock:
        if _default is None:
            _default = ModeCache()
        return _default
