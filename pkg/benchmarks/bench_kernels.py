"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  The same comparison can be
forced package-wide at runtime with ``QGO_NO_NUMBA=1``.
"""

import time

import numpy as np

from qgo._kernels import (HAVE_NUMBA, _autocorr_exact_numpy,
                          _autocorr_numerators_numpy, _match_coincidences_python)

if HAVE_NUMBA:
    from qgo._kernels import (_autocorr_exact_numba, _autocorr_numerators_numba,
                              _match_coincidences_numba)


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def report(name, numpy_time, numba_time):
    if numba_time is None:
        print(f"{name:<28} numpy {numpy_time * 1e3:9.1f} ms   numba -")
    else:
        speedup = numpy_time / numba_time
        print(f"{name:<28} numpy {numpy_time * 1e3:9.1f} ms   "
              f"numba {numba_time * 1e3:9.1f} ms   ({speedup:.1f}x)")


def main():
    rng = np.random.default_rng(0)
    n, max_lag = 200_000, 10_000
    x = rng.integers(0, 2, n).astype(np.float64)
    xc = np.ascontiguousarray(x - x.mean())

    print(f"autocorrelation sweep: N={n}, lags 1..{max_lag}")
    if HAVE_NUMBA:
        _autocorr_numerators_numba(xc[:64].copy(), 8)  # compile outside timing
        _autocorr_exact_numba(x[:64].copy(), 8)
    t_np, ref = timed(_autocorr_numerators_numpy, xc, max_lag)
    t_nb = None
    if HAVE_NUMBA:
        t_nb, got = timed(_autocorr_numerators_numba, xc, max_lag)
        assert np.allclose(ref, got, rtol=1e-9, atol=1e-6)
    report("single-mean numerators", t_np, t_nb)

    t_np, ref = timed(_autocorr_exact_numpy, x, max_lag)
    t_nb = None
    if HAVE_NUMBA:
        t_nb, got = timed(_autocorr_exact_numba, x, max_lag)
        assert np.allclose(ref, got, rtol=1e-8, atol=1e-10)
    report("exact two-mean form", t_np, t_nb)

    n_tags = 2_000_000
    times = np.sort(rng.integers(0, 20 * n_tags, n_tags)).astype(np.int64)
    sides = rng.integers(0, 2, n_tags).astype(np.uint8)
    print(f"\ncoincidence matching: {n_tags} tags, window 4 ns")
    if HAVE_NUMBA:
        _match_coincidences_numba(times[:64].copy(), sides[:64].copy(), np.int64(4))
    t_np, ref = timed(_match_coincidences_python, times, sides, 4, repeat=1)
    t_nb = None
    if HAVE_NUMBA:
        t_nb, got = timed(_match_coincidences_numba, times, sides, np.int64(4))
        assert np.array_equal(ref[0], got[0]) and np.array_equal(ref[1], got[1])
    report("greedy matcher", t_np, t_nb)

    if not HAVE_NUMBA:
        print("\nnumba unavailable or disabled (QGO_NO_NUMBA): fallback only")


if __name__ == "__main__":
    main()
