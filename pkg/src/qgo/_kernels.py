"""Hot numeric kernels: lagged autocorrelation sweeps and coincidence matching.

Two implementations exist for every kernel: a numba ``@njit`` direct loop
and a pure-numpy path.  Which one is the default is a measured decision
(see ``benchmarks/bench_kernels.py``):

* the autocorrelation sweeps use the numpy FFT/prefix-sum path everywhere
  (O(N log N) beats the jitted O(N*K) loop by two orders of magnitude at
  N=2e5, K=1e4); the jitted direct sums remain as independent cross-checks;
* the greedy coincidence matcher is inherently sequential, where the jitted
  loop wins ~70x, so it runs under numba unless ``QGO_NO_NUMBA=1`` (or numba
  is missing), which selects the plain-python fallback.

``BACKEND`` reports which matcher path is active.  Both paths of every
kernel produce identical results and are compared in the test suite.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

_disabled = os.environ.get("QGO_NO_NUMBA", "").strip() not in ("", "0")

if not _disabled:
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="The TBB threading layer")
            from numba import njit, prange
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Autocorrelation numerators: sum_{t=0}^{n-k-1} xc[t] * xc[t+k] for k=1..K,
# with xc already centered on the overall mean.


def _autocorr_numerators_numpy(xc: np.ndarray, max_lag: int) -> np.ndarray:
    n = xc.shape[0]
    nfft = 1
    while nfft < 2 * n:
        nfft <<= 1
    f = np.fft.rfft(xc, nfft)
    acf = np.fft.irfft(f * np.conj(f), nfft)
    return acf[1:max_lag + 1].copy()


# ---------------------------------------------------------------------------
# Exact two-mean autocorrelation: separate means and normalizations for the
# leading and trailing windows at each lag.


def _autocorr_exact_numpy(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.shape[0]
    nfft = 1
    while nfft < 2 * n:
        nfft <<= 1
    f = np.fft.rfft(x, nfft)
    raw = np.fft.irfft(f * np.conj(f), nfft)[:max_lag + 1]
    s = np.concatenate(([0.0], np.cumsum(x)))
    q = np.concatenate(([0.0], np.cumsum(x * x)))
    k = np.arange(1, max_lag + 1)
    m = n - k
    head_sum = s[m]
    tail_sum = s[n] - s[k]
    mean1 = head_sum / m
    mean2 = tail_sum / m
    num = raw[1:] - mean2 * head_sum - mean1 * tail_sum + m * mean1 * mean2
    d1 = q[m] - head_sum ** 2 / m
    d2 = (q[n] - q[k]) - tail_sum ** 2 / m
    return num / np.sqrt(d1 * d2)


# ---------------------------------------------------------------------------
# Greedy earliest-first coincidence matching.  Tags must be sorted by
# (corrected time, channel); sides[i] is 0 for channels {1,2} and 1 for
# {3,4}.  Returns index pairs (side-0 tag, side-1 tag) in completion order.


def _match_coincidences_python(times: np.ndarray, sides: np.ndarray,
                               window: int) -> tuple[np.ndarray, np.ndarray]:
    t_list = times.tolist()
    s_list = sides.tolist()
    n = len(t_list)
    queue_a: list[int] = []
    queue_b: list[int] = []
    heads = [0, 0]
    out_a = []
    out_b = []
    for i in range(n):
        t = t_list[i]
        cutoff = t - window
        if s_list[i] == 0:
            h = heads[1]
            while h < len(queue_b) and t_list[queue_b[h]] < cutoff:
                h += 1
            heads[1] = h
            if h < len(queue_b):
                out_a.append(i)
                out_b.append(queue_b[h])
                heads[1] = h + 1
            else:
                queue_a.append(i)
        else:
            h = heads[0]
            while h < len(queue_a) and t_list[queue_a[h]] < cutoff:
                h += 1
            heads[0] = h
            if h < len(queue_a):
                out_a.append(queue_a[h])
                out_b.append(i)
                heads[0] = h + 1
            else:
                queue_b.append(i)
    return np.asarray(out_a, dtype=np.int64), np.asarray(out_b, dtype=np.int64)


if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _autocorr_numerators_numba(xc, max_lag):  # pragma: no cover - jitted
        n = xc.shape[0]
        out = np.empty(max_lag)
        for k in prange(1, max_lag + 1):
            s = 0.0
            for t in range(n - k):
                s += xc[t] * xc[t + k]
            out[k - 1] = s
        return out

    @njit(cache=True, parallel=True)
    def _autocorr_exact_numba(x, max_lag):  # pragma: no cover - jitted
        n = x.shape[0]
        out = np.empty(max_lag)
        for k in prange(1, max_lag + 1):
            m = n - k
            s1 = 0.0
            s2 = 0.0
            for t in range(m):
                s1 += x[t]
                s2 += x[t + k]
            mean1 = s1 / m
            mean2 = s2 / m
            num = 0.0
            d1 = 0.0
            d2 = 0.0
            for t in range(m):
                a = x[t] - mean1
                b = x[t + k] - mean2
                num += a * b
                d1 += a * a
                d2 += b * b
            out[k - 1] = num / np.sqrt(d1 * d2)
        return out

    @njit(cache=True)
    def _match_coincidences_numba(times, sides, window):  # pragma: no cover
        n = times.shape[0]
        queue_a = np.empty(n, dtype=np.int64)
        queue_b = np.empty(n, dtype=np.int64)
        a_head = a_tail = 0
        b_head = b_tail = 0
        out_a = np.empty(n, dtype=np.int64)
        out_b = np.empty(n, dtype=np.int64)
        m = 0
        for i in range(n):
            t = times[i]
            cutoff = t - window
            if sides[i] == 0:
                while b_head < b_tail and times[queue_b[b_head]] < cutoff:
                    b_head += 1
                if b_head < b_tail:
                    out_a[m] = i
                    out_b[m] = queue_b[b_head]
                    b_head += 1
                    m += 1
                else:
                    queue_a[a_tail] = i
                    a_tail += 1
            else:
                while a_head < a_tail and times[queue_a[a_head]] < cutoff:
                    a_head += 1
                if a_head < a_tail:
                    out_a[m] = queue_a[a_head]
                    out_b[m] = i
                    a_head += 1
                    m += 1
                else:
                    queue_b[b_tail] = i
                    b_tail += 1
        return out_a[:m].copy(), out_b[:m].copy()

    def match_coincidences(times: np.ndarray, sides: np.ndarray,
                           window: int) -> tuple[np.ndarray, np.ndarray]:
        return _match_coincidences_numba(np.ascontiguousarray(times, dtype=np.int64),
                                         np.ascontiguousarray(sides, dtype=np.uint8),
                                         np.int64(window))

else:

    def match_coincidences(times: np.ndarray, sides: np.ndarray,
                           window: int) -> tuple[np.ndarray, np.ndarray]:
        return _match_coincidences_python(np.ascontiguousarray(times, dtype=np.int64),
                                          np.ascontiguousarray(sides, dtype=np.uint8),
                                          int(window))


def autocorr_numerators(xc: np.ndarray, max_lag: int) -> np.ndarray:
    return _autocorr_numerators_numpy(np.ascontiguousarray(xc, dtype=np.float64),
                                      int(max_lag))


def autocorr_exact(x: np.ndarray, max_lag: int) -> np.ndarray:
    return _autocorr_exact_numpy(np.ascontiguousarray(x, dtype=np.float64),
                                 int(max_lag))
