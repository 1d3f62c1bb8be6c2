"""Independent oracle implementations used to cross-check the package.

Each oracle deliberately takes a different computational route from the
code under test: the GLR oracle recomputes segment means from raw slices
in floating point (the package rearranges into an integer product table);
the klUCB oracle walks a fixed 1e-6 grid (the package bisects); the
feasibility margins are evaluated in 50-digit arithmetic via mpmath
(the package uses float64). Keeping the routes separate is the point;
do not refactor them to share code with the package.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np


def kl_float(p: float, q: float) -> float:
    """Bernoulli KL in plain float arithmetic with 0*log(0)=0."""
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return out


def glr_brute_force(samples) -> tuple[float, int]:
    """O(n^2) GLR: for every split, recompute both segment means from raw
    slices and evaluate s*kl(m1, m) + (n-s)*kl(m2, m) in float arithmetic."""
    arr = np.asarray(samples, dtype=np.float64)
    n = arr.size
    if n < 2:
        return 0.0, 0
    mean_all = float(arr.sum()) / n
    best, best_s = -math.inf, 1
    for s in range(1, n):
        m1 = float(arr[:s].sum()) / s
        m2 = float(arr[s:].sum()) / (n - s)
        stat = s * kl_float(m1, mean_all) + (n - s) * kl_float(m2, mean_all)
        if stat > best:
            best, best_s = stat, s
    return max(best, 0.0), best_s


def klucb_grid(mean_hat: float, pulls: int, t: float, c: float = 0.0,
               step: float = 1e-6) -> float:
    """Largest q on the grid {mean_hat, mean_hat+step, ...} inside the KL budget."""
    budget = math.log(t)
    if c > 0.0:
        budget += c * math.log(math.log(max(t, 3.0)))
    target = budget / pulls
    qs = np.arange(mean_hat, 1.0 + step / 2, step)
    qs = qs[qs <= 1.0]
    if mean_hat >= 1.0:
        return 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        kl = np.zeros_like(qs)
        if mean_hat > 0.0:
            kl += mean_hat * np.log(mean_hat / qs)
        if mean_hat < 1.0:
            kl += (1.0 - mean_hat) * np.log((1.0 - mean_hat) / (1.0 - qs))
    kl[qs >= 1.0] = np.inf if mean_hat < 1.0 else 0.0
    ok = np.nonzero(kl <= target)[0]
    return float(qs[ok[-1]]) if ok.size else mean_hat


def feasibility_margin_mp(T: int) -> mpmath.mpf:
    """sqrt(T)/(54*(log2 T + 1)) - ln T at 50 decimal digits."""
    with mpmath.workdps(50):
        Tm = mpmath.mpf(T)
        return mpmath.sqrt(Tm) / (54 * (mpmath.log(Tm, 2) + 1)) - mpmath.log(Tm)


def bd_margin_mp(T: int) -> mpmath.mpf:
    """ln(B_D(T)) - ln(T) at 50 decimal digits."""
    with mpmath.workdps(50):
        Tm = mpmath.mpf(T)
        lt = mpmath.log(Tm)
        bd = 24 * (mpmath.log(Tm, 2) + 1) * lt * mpmath.sqrt(Tm) * (1 + 15 * lt)
        return mpmath.log(bd) - lt


def delta_lower_bound_mp(T: int) -> mpmath.mpf:
    with mpmath.workdps(50):
        Tm = mpmath.mpf(T)
        return Tm * mpmath.exp(-mpmath.sqrt(Tm) / (54 * (mpmath.log(Tm, 2) + 1)))
