import threading

import numpy as np
import pytest

from sads_udw import radial
from sads_udw.geometry import circular_kinematics
from sads_udw.modecache import ModeCache, mode_tolerances
from sads_udw.response import DetectorSpec, sum_l


class TestMemoization:
    def test_second_request_is_free(self, g01):
        cache = ModeCache()
        m1 = cache.get(g01, 1.0, 0)
        assert cache.stats()["misses"] == 1
        m2 = cache.get(g01, 1.0, 0)
        assert m2 is m1
        assert cache.stats() == {"hits": 1, "misses": 1, "disk_hits": 0,
                                 "entries": 1}

    def test_method_change_forces_recompute(self, g01):
        cache = ModeCache()
        cache.get(g01, 4.5, 0, method="wronskian")
        cache.get(g01, 4.5, 0, method="series")
        assert cache.stats()["misses"] == 2

    def test_tolerance_change_forces_recompute(self, g01, monkeypatch):
        cache = ModeCache()
        cache.get(g01, 1.0, 0)
        monkeypatch.setattr(radial, "PHASE_TOL", 1e-9)
        assert mode_tolerances()[4] == 1e-9
        cache.get(g01, 1.0, 0)
        assert cache.stats()["misses"] == 2

    def test_thread_safety_last_writer_wins(self, g01):
        cache = ModeCache()
        results = []

        def work():
            results.append(cache.get(g01, 2.0, 1))

        threads = [threading.Thread(target=work) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(results) == 4
        assert cache.stats()["entries"] == 1
        vals = {m.radial(1.0) for m in results}
        assert len(vals) == 1  # equal keys are interchangeable


class TestDiskLayer:
    def test_roundtrip_across_instances(self, g01, tmp_path):
        c1 = ModeCache(disk_dir=str(tmp_path))
        mode = c1.get(g01, 1.3, 1)
        c2 = ModeCache(disk_dir=str(tmp_path))
        clone = c2.get(g01, 1.3, 1)
        assert c2.stats()["disk_hits"] == 1 and c2.stats()["misses"] == 0
        assert clone.radial(1.0) == mode.radial(1.0)

    def test_corrupt_entry_recomputed_with_warning(self, g01, tmp_path):
        c1 = ModeCache(disk_dir=str(tmp_path))
        c1.get(g01, 1.3, 1)
        pkl = list(tmp_path.glob("*.pkl"))
        assert len(pkl) == 1
        pkl[0].write_bytes(b"not a pickle")
        c2 = ModeCache(disk_dir=str(tmp_path))
        with pytest.warns(RuntimeWarning, match="unreadable"):
            mode = c2.get(g01, 1.3, 1)
        assert c2.stats()["misses"] == 1
        assert np.isfinite(mode.radial(1.0))
        # overwritten: a third instance reads it cleanly
        c3 = ModeCache(disk_dir=str(tmp_path))
        c3.get(g01, 1.3, 1)
        assert c3.stats()["disk_hits"] == 1


class TestCircularGridReuse:
    def test_symmetric_grid_shares_modes(self, g01):
        # omega_-(m, -E) and omega_+(m, +E) are the same float, so a
        # symmetric grid re-uses mode solves across points
        cache = ModeCache()
        spec = DetectorSpec("circular", 1.0, "hartle_hawking", l_max=2)
        energy = 0.8123
        sum_l(g01, spec, np.array([-energy, energy]), cache=cache)
        stats = cache.stats()
        assert stats["hits"] > 0
