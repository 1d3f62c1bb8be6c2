"""Bernoulli GLR change detector over a single 0/1 sample stream.

The statistic at n samples is the two-segment likelihood-ratio form

    max over s in [1, n-1] of  s*kl(m_1s, m_1n) + (n-s)*kl(m_s1n, m_1n)

where m_1s, m_s1n, m_1n are the empirical means of the prefix, the suffix
and the whole stream, and kl is the Bernoulli KL divergence. A change is
declared once the statistic reaches beta(n, delta) = ln(4*n*sqrt(n)/delta).

For 0/1 samples every segment sum is an integer, so each split's value
expands into sums of x*ln(x) terms at integer arguments:

    s*kl(k/s, K/n) + (n-s)*kl((K-k)/(n-s), K/n)
        = E(s) - (L[K] + L[n-K] - L[n]),
    E(s) = L[k] + L[s-k] - L[s] + L[K-k] + L[n-s-K+k] - L[n-s],

with L[i] = i*ln(i), L[0] = 0, k the prefix sum at s and K at n. The scan
therefore needs one shared L table and no log evaluations per split, which
is what makes stride-1 detection affordable inside the simulation kernels.
The tests check this rearrangement against a literal O(n^2) recomputation.
"""
from __future__ import annotations

import math
import threading

import numpy as np
from numba import njit

_table_lock = threading.Lock()
_table = np.zeros(1, dtype=np.float64)


def xlogx_table(max_n: int) -> np.ndarray:
    """Shared read-only table of i*ln(i) for i = 0..max_n (at least)."""
    global _table
    if _table.size <= max_n:
        with _table_lock:
            if _table.size <= max_n:
                size = max(1024, 2 * max_n + 1)
                idx = np.arange(size, dtype=np.float64)
                with np.errstate(divide="ignore", invalid="ignore"):
                    fresh = idx * np.log(idx)
                fresh[0] = 0.0
                _table = fresh
    return _table


def beta_threshold(n: int, delta: float) -> float:
    """Detection threshold ln(4*n*sqrt(n)/delta)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return math.log(4.0 / delta) + 1.5 * math.log(n)


@njit(cache=True, nogil=True, inline="always")
def _glr_scan(prefix, n, table):
    """Max split statistic and its argmax over s in [1, n-1].

    prefix[i] holds the sum of the first i samples (prefix[0] = 0).
    Ties resolve to the smallest split. Returns (0.0, 0) when n < 2.
    """
    if n < 2:
        return 0.0, 0
    big_k = prefix[n]
    base = table[big_k] + table[n - big_k] - table[n]
    best = -np.inf
    best_s = 1
    for s in range(1, n):
        k = prefix[s]
        e = (table[k] + table[s - k] - table[s]
             + table[big_k - k] + table[n - s - big_k + k] - table[n - s])
        if e > best:
            best = e
            best_s = s
    stat = best - base
    if stat < 0.0:
        # the rearranged terms can round slightly below zero when all
        # segment means coincide
        stat = 0.0
    return stat, best_s


def glr_statistic(samples) -> tuple[float, int]:
    """Statistic and argmax split (1-based) for a 0/1 sample stream."""
    arr = np.asarray(samples)
    if arr.ndim != 1:
        raise ValueError("samples must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("samples must be 0/1 valued")
    n = int(arr.size)
    prefix = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(arr.astype(np.int64), out=prefix[1:])
    stat, split = _glr_scan(prefix, n, xlogx_table(max(n, 2)))
    return float(stat), int(split)


@njit(cache=True, nogil=True)
def _first_detection(prefix, n, beta_c, stride, table):
    # earliest sample count k (multiple of stride, k >= 2) whose scan
    # reaches beta(k, delta) = beta_c + 1.5*ln(k); -1 if none by n
    for k in range(2, n + 1):
        if k % stride != 0:
            continue
        stat, _ = _glr_scan(prefix, k, table)
        if stat >= beta_c + 1.5 * math.log(k):
            return k
    return -1


def first_detection(samples, delta: float, stride: int = 1) -> int:
    """Earliest sample count at which detect() would fire; -1 if never."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    arr = np.asarray(samples)
    if arr.ndim != 1 or (arr.size and not np.isin(arr, (0, 1)).all()):
        raise ValueError("samples must be a one-dimensional 0/1 stream")
    n = int(arr.size)
    prefix = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(arr.astype(np.int64), out=prefix[1:])
    return int(_first_detection(prefix, n, math.log(4.0 / delta), stride,
                                xlogx_table(max(n, 2))))


class GlrDetector:
    """Stateful detector over one arm's reward stream.

    append() feeds samples; detect() runs the full scan only on sample
    counts divisible by downsample_stride (stride 1 checks every sample)
    and reports whether the statistic reached beta(n, delta).
    """

    def __init__(self, delta: float, downsample_stride: int = 1, capacity: int = 256):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if downsample_stride < 1:
            raise ValueError("downsample_stride must be >= 1")
        self.delta = float(delta)
        self.stride = int(downsample_stride)
        self._prefix = np.zeros(capacity + 1, dtype=np.int64)
        self.n = 0

    def append(self, sample: int) -> None:
        if sample not in (0, 1):
            raise ValueError("samples must be 0 or 1")
        if self.n + 1 >= self._prefix.size:
            grown = np.zeros(2 * self._prefix.size, dtype=np.int64)
            grown[: self._prefix.size] = self._prefix
            self._prefix = grown
        self._prefix[self.n + 1] = self._prefix[self.n] + sample
        self.n += 1

    def statistic(self) -> tuple[float, int]:
        stat, split = _glr_scan(self._prefix, self.n, xlogx_table(max(self.n, 2)))
        return float(stat), int(split)

    def detect(self) -> bool:
        if self.n < 2 or self.n % self.stride != 0:
            return False
        stat, _ = self.statistic()
        return stat >= beta_threshold(self.n, self.delta)

    def reset(self) -> None:
        self._prefix[: self.n + 1] = 0
        self.n = 0
