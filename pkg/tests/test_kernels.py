import os
import subprocess
import sys

import numpy as np
import pytest

from qgo import _kernels
from qgo._kernels import (_autocorr_exact_numpy, _autocorr_numerators_numpy,
                          _match_coincidences_python, autocorr_exact,
                          autocorr_numerators, match_coincidences)

from oracle_helpers import match_oracle


def _direct_numerators(xc, max_lag):
    n = len(xc)
    return np.array([np.dot(xc[:n - k], xc[k:]) for k in range(1, max_lag + 1)])


def _direct_exact(x, max_lag):
    n = len(x)
    out = []
    for k in range(1, max_lag + 1):
        m = n - k
        head = x[:m] - x[:m].mean()
        tail = x[k:] - x[k:].mean()
        out.append(np.dot(head, tail) / np.sqrt(np.dot(head, head) * np.dot(tail, tail)))
    return np.array(out)


class TestAutocorrKernels:
    def test_fft_matches_direct_sums(self):
        rng = np.random.default_rng(0)
        x = rng.random(4000)
        xc = x - x.mean()
        got = _autocorr_numerators_numpy(xc, 100)
        assert np.allclose(got, _direct_numerators(xc, 100), rtol=1e-10, atol=1e-8)

    def test_exact_numpy_matches_direct(self):
        rng = np.random.default_rng(1)
        x = rng.integers(0, 2, 3000).astype(float)
        got = _autocorr_exact_numpy(x, 80)
        assert np.allclose(got, _direct_exact(x, 80), rtol=1e-9, atol=1e-10)

    def test_public_path_is_fft(self):
        rng = np.random.default_rng(2)
        x = rng.random(6000)
        xc = x - x.mean()
        assert np.allclose(autocorr_numerators(xc, 200),
                           _direct_numerators(xc, 200), rtol=1e-9, atol=1e-7)
        assert np.allclose(autocorr_exact(x, 200),
                           _direct_exact(x, 200), rtol=1e-9, atol=1e-9)

    @pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba disabled")
    def test_jitted_cross_check_matches_fft(self):
        from qgo._kernels import _autocorr_exact_numba, _autocorr_numerators_numba
        rng = np.random.default_rng(9)
        x = rng.integers(0, 2, 20000).astype(np.float64)
        xc = np.ascontiguousarray(x - x.mean())
        assert np.allclose(_autocorr_numerators_numba(xc, 300),
                           _autocorr_numerators_numpy(xc, 300),
                           rtol=1e-9, atol=1e-6)
        assert np.allclose(_autocorr_exact_numba(np.ascontiguousarray(x), 300),
                           _autocorr_exact_numpy(x, 300),
                           rtol=1e-8, atol=1e-10)


class TestMatcherKernels:
    @staticmethod
    def _random_stream(rng, n):
        times = np.sort(rng.integers(0, n * 2, size=n)).astype(np.int64)
        sides = rng.integers(0, 2, size=n).astype(np.uint8)
        return times, sides

    def test_python_fallback_matches_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            n = int(rng.integers(5, 300))
            times, sides = self._random_stream(rng, n)
            window = int(rng.integers(1, 7))
            ia, ib = _match_coincidences_python(times, sides, window)
            assert list(zip(ia.tolist(), ib.tolist())) == match_oracle(times, sides, window)

    def test_active_backend_matches_python(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(5, 2000))
            times, sides = self._random_stream(rng, n)
            window = int(rng.integers(1, 9))
            got = match_coincidences(times, sides, window)
            ref = _match_coincidences_python(times, sides, window)
            assert np.array_equal(got[0], ref[0]) and np.array_equal(got[1], ref[1])

    def test_empty_stream(self):
        ia, ib = match_coincidences(np.empty(0, np.int64), np.empty(0, np.uint8), 2)
        assert len(ia) == 0 and len(ib) == 0


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, QGO_NO_NUMBA="1")
    code = "import qgo._kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_default_backend_reported():
    assert _kernels.BACKEND in ("numba", "numpy")
