import math

import numpy as np
import pytest

from eocalib._kernels import _fallback

try:
    from eocalib._kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled backend not built")


def random_inputs(rng, n):
    y = rng.uniform(0.0, 100.0, n)
    c = rng.uniform(0.0, 60.0, n)
    z = np.minimum(y, c)
    delta = (y <= c).astype(np.int8)
    return z, delta


@needs_core
class TestBackendParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_km_curve_matches(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 3_000))
        z, delta = random_inputs(rng, n)
        t = float(rng.uniform(0.5, 50.0))
        res_py = _fallback.km_curve(z, delta, t)
        res_c = _core.km_curve(z, delta, t)
        np.testing.assert_array_equal(res_py[0], res_c[0])
        np.testing.assert_array_equal(res_py[1], res_c[1])
        np.testing.assert_array_equal(res_py[2], res_c[2])
        assert res_py[3] == pytest.approx(res_c[3], rel=1e-12, abs=0.0)
        if math.isnan(res_py[4]):
            assert math.isnan(res_c[4])
        else:
            assert res_py[4] == pytest.approx(res_c[4], rel=1e-12, abs=0.0)
        assert res_py[5] == res_c[5]

    @pytest.mark.parametrize("seed", range(8))
    def test_calibration_sums_match(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(1, 5_000))
        z, delta = random_inputs(rng, n)
        e_t0 = np.full(n, 0.1)
        e_z = np.minimum(z / 100.0, 1.0)
        a = _fallback.calibration_sums(z, delta, e_t0, e_z, 10.0)
        b = _core.calibration_sums(z, delta, e_t0, e_z, 10.0)
        assert a[:3] == b[:3]
        for x, y in zip(a[3:], b[3:]):
            assert x == pytest.approx(y, rel=1e-10, abs=1e-12)

    def test_km_ties_match(self):
        z = np.array([5.0, 5.0, 5.0, 7.0, 7.0])
        delta = np.array([1, 0, 1, 0, 1], dtype=np.int8)
        for t in (5.0, 6.0, 7.0):
            a = _fallback.km_curve(z, delta, t)
            b = _core.km_curve(z, delta, t)
            assert a[3] == b[3] and a[4] == b[4] and a[5] == b[5]


class TestFallbackEdgeCases:
    def test_no_observations_before_horizon(self):
        z = np.array([5.0, 6.0])
        delta = np.array([0, 1], dtype=np.int8)
        times, risk, events, survival, gw, degenerate = _fallback.km_curve(z, delta, 1.0)
        assert times.shape == (0,)
        assert survival == 1.0 and gw == 0.0 and not degenerate

    def test_only_censorings(self):
        z = np.array([1.0, 2.0, 3.0])
        delta = np.zeros(3, dtype=np.int8)
        *_, survival, gw, degenerate = _fallback.km_curve(z, delta, 3.0)
        assert survival == 1.0 and gw == 0.0 and not degenerate

    def test_degenerate_last_event(self):
        z = np.array([1.0, 2.0])
        delta = np.array([1, 1], dtype=np.int8)
        *_, survival, gw, degenerate = _fallback.km_curve(z, delta, 2.0)
        assert survival == 0.0 and math.isnan(gw) and degenerate

    def test_sums_on_single_subject(self):
        out = _fallback.calibration_sums(
            np.array([3.0]), np.array([1], dtype=np.int8),
            np.array([0.1]), np.array([0.03]), 10.0
        )
        n_ks, n_uks, o_ks, e_full, e_ks, e_uks, e_m1, e_m2 = out
        assert (n_ks, n_uks, o_ks) == (1, 0, 1)
        assert e_m1 == 0.03 and e_m2 == 0.1 and e_full == 0.1


def test_backend_reports_name():
    import eocalib._kernels as kernels

    assert kernels.backend() in ("compiled", "python")
