"""Multi-scale randomly scheduled restarts with memory (MASTER).

Time is cut into blocks of length 2^n. At each block start, for every scale
m = 0..n and every aligned slot k, a fresh base-algorithm instance is
scheduled on the interval [t_n + k*2^m, t_n + (k+1)*2^m - 1] with
probability rho(2^n)/rho(2^m); the single scale-n instance always exists.
At each step the shortest scheduled instance covering t is active: it picks
the arm from its own history at its local time t' = t - start + 1, and only
its history absorbs the reward. Longer instances pause while shorter ones
run and resume with their accumulated counts afterwards.

Two restart tests run on the block's aggregate statistics:

  Test 1 (at each instance end, interval [s, e] of length 2^m):
      mean reward over [s, e] - min of g over [t_n, t]
          >= 54 * (log2 T + 1) * ln(T / delta) * rho(2^m)
  Test 2 (every step, L = t - t_n + 1):
      mean of (g - R) since t_n
          >= 18 * (log2 T + 1) * ln(T / delta) * rho(L)

where g is the active instance's optimistic estimate (clipped to [0, 1])
and R the received reward. Both statistics are bounded by 1, so whenever
the right-hand sides exceed 1 (which holds for every realistic horizon and
delta, see the theory module) the tests cannot fire and no change is ever
declared. A debug-only threshold scale exists to exercise the trigger and
restart path in tests; experiment presets leave it at 1.

A fired test or an exhausted block starts a fresh block. In fixed-n mode
(the default) n stays floor(log2 T) throughout; otherwise n starts at 0 and
increments with every new block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .policies import _select, policy_kind

INV_SQRT = 0
MAB_SQRT_ALOG = 1

_RHO_FORMS = {"inv_sqrt": INV_SQRT, "mab": MAB_SQRT_ALOG}


def rho_form_code(name: str) -> int:
    try:
        return _RHO_FORMS[name]
    except KeyError:
        raise ValueError(f"unknown rho form {name!r}; expected one of {sorted(_RHO_FORMS)}") from None


@njit(cache=True, nogil=True, inline="always")
def _rho(x, form, aln):
    # aln = A * ln(T/delta), used only by the mab form.
    inv = 1.0 / math.sqrt(x)
    if form == INV_SQRT:
        return inv
    v = math.sqrt(aln / x)
    if v > 1.0:
        v = 1.0
    if v < inv:
        v = inv
    return v


@dataclass
class RhoConfig:
    """Base-algorithm regret-rate function rho(t).

    inv_sqrt is the lower envelope 1/sqrt(t); mab is
    min(1, sqrt(A*ln(T/delta)/t)) floored at 1/sqrt(t). Construction
    numerically verifies rho >= 1/sqrt(t), rho non-increasing and
    t*rho(t) non-decreasing (every t up to 2^20, a geometric grid beyond).
    """
    form: str
    n_arms: int
    T: int
    delta: float

    def __post_init__(self):
        rho_form_code(self.form)
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.n_arms < 1:
            raise ValueError("n_arms must be >= 1")
        self.aln = self.n_arms * math.log(self.T / self.delta)
        if self.T <= 1 << 20:
            ts = np.arange(1, self.T + 1, dtype=np.float64)
        else:
            ts = np.unique(np.concatenate([
                np.arange(1, 1025, dtype=np.float64),
                np.geomspace(1024, self.T, 4096).round(),
            ]))
        vals = self._eval(ts)
        if (vals < 1.0 / np.sqrt(ts) - 1e-12).any():
            raise ValueError("rho(t) dropped below 1/sqrt(t)")
        if (np.diff(vals) > 1e-12).any():
            raise ValueError("rho(t) must be non-increasing")
        if (np.diff(ts * vals) < -1e-9).any():
            raise ValueError("t*rho(t) must be non-decreasing")

    def _eval(self, ts: np.ndarray) -> np.ndarray:
        inv = 1.0 / np.sqrt(ts)
        if self.form == "inv_sqrt":
            return inv
        return np.maximum(np.minimum(1.0, np.sqrt(self.aln / ts)), inv)


def rho(t: int, cfg: RhoConfig) -> float:
    if not 1 <= t <= cfg.T:
        raise ValueError("t must lie in [1, T]")
    return float(_rho(float(t), rho_form_code(cfg.form), cfg.aln))


def test_threshold_bases(T: int, delta: float) -> tuple[float, float]:
    """Scale-free threshold factors of Tests 1 and 2.

    Multiplying by rho(interval length) and the debug scale gives the full
    right-hand sides: 54*(log2 T + 1)*ln(T/delta) and a third of that.
    """
    n_hat = math.log2(T) + 1.0
    lt = math.log(T / delta)
    return 54.0 * n_hat * lt, 18.0 * n_hat * lt


def test1_threshold(length: int, T: int, delta: float, rho_cfg: RhoConfig,
                    debug_scale: float = 1.0) -> float:
    base, _ = test_threshold_bases(T, delta)
    return base * rho(length, rho_cfg) * debug_scale


def test2_threshold(elapsed: int, T: int, delta: float, rho_cfg: RhoConfig,
                    debug_scale: float = 1.0) -> float:
    _, base = test_threshold_bases(T, delta)
    return base * rho(elapsed, rho_cfg) * debug_scale


@njit(cache=True, nogil=True)
def _schedule_block(gen, n, form, aln, starts, lengths, active_map):
    """Draw one block's instance set and paint the active map.

    Scales are visited from n down to 0 and slots left to right, so shorter
    instances overwrite longer ones in the map, leaving each offset pointing
    at its shortest covering instance. One uniform is consumed per candidate
    slot below scale n regardless of outcome, keeping the stream layout
    independent of which instances appear.
    """
    block_len = 1 << n
    rho_n = _rho(float(block_len), form, aln)
    num = 0
    for m in range(n, -1, -1):
        plen = 1 << m
        prob = rho_n / _rho(float(plen), form, aln)
        for k in range(1 << (n - m)):
            take = True
            if m != n:
                take = gen.random() < prob
            if take:
                s = k * plen
                starts[num] = s
                lengths[num] = plen
                for j in range(s, s + plen):
                    active_map[j] = num
                num += 1
    return num


@njit(cache=True, nogil=True)
def _ends_csr(starts, lengths, num, block_len, end_ptr, end_ids):
    # counting sort of instances by end offset, for O(1) per-step lookup
    for i in range(block_len + 1):
        end_ptr[i] = 0
    for i in range(num):
        end_ptr[starts[i] + lengths[i] - 1] += 1
    total = 0
    for i in range(block_len):
        c = end_ptr[i]
        end_ptr[i] = total
        total += c
    end_ptr[block_len] = total
    fill = end_ptr[: block_len].copy()
    for i in range(num):
        e = starts[i] + lengths[i] - 1
        end_ids[fill[e]] = i
        fill[e] += 1


@njit(cache=True, nogil=True)
def _block_engine(means, reward_u, best, t0, T, n_arms,
                  starts, lengths, num, active_map, end_ptr, end_ids,
                  base_kind, tol, c, form, aln,
                  thr1_base, thr2_base, debug_scale,
                  pulls, sums, pref, trace, regret0,
                  active_out, arm_out, f_out):
    """Run one block from global step t0; returns (steps, fired, regret).

    Instrumentation arrays (active_out, arm_out, f_out) are written only
    when non-empty; pass length-0 arrays to skip.
    """
    block_len = active_map.size
    instrument = active_out.size > 0
    regret = regret0
    g_min = np.inf
    acc2 = 0.0
    pref[0] = 0.0
    off = 0
    while off < block_len and t0 + off < T:
        row = t0 + off
        inst = active_map[off]
        t_local = float(off - starts[inst] + 1)
        arm, f = _select(pulls[inst], sums[inst], n_arms, t_local, base_kind, tol, c)
        r = 1.0 if reward_u[row] < means[row, arm] else 0.0
        pulls[inst, arm] += 1
        sums[inst, arm] += r
        pref[off + 1] = pref[off] + r
        if f < g_min:
            g_min = f
        acc2 += f - r
        regret += best[row] - means[row, arm]
        trace[row] = regret
        if instrument:
            active_out[row] = inst
            arm_out[row] = arm
            f_out[row] = f
        fired = False
        for ii in range(end_ptr[off], end_ptr[off + 1]):
            j = end_ids[ii]
            length = lengths[j]
            stat = (pref[off + 1] - pref[starts[j]]) / length - g_min
            if stat >= thr1_base * _rho(float(length), form, aln) * debug_scale:
                fired = True
        if not fired:
            elapsed = off + 1
            if acc2 / elapsed >= thr2_base * _rho(float(elapsed), form, aln) * debug_scale:
                fired = True
        off += 1
        if fired:
            return off, True, regret
    return off, False, regret


@njit(cache=True, nogil=True)
def _master_trial(means, reward_u, best, gen, n_arms, n0, fixed_n,
                  form, aln, base_kind, tol, c,
                  thr1_base, thr2_base, debug_scale,
                  trace, active_out, arm_out, f_out):
    T = means.shape[0]
    t = 0
    regret = 0.0
    declared = 0
    n_cur = n0
    while t < T:
        block_len = 1 << n_cur
        cap = 2 * block_len
        starts = np.empty(cap, dtype=np.int64)
        lengths = np.empty(cap, dtype=np.int64)
        active_map = np.empty(block_len, dtype=np.int64)
        num = _schedule_block(gen, n_cur, form, aln, starts, lengths, active_map)
        end_ptr = np.empty(block_len + 1, dtype=np.int64)
        end_ids = np.empty(num, dtype=np.int64)
        _ends_csr(starts, lengths, num, block_len, end_ptr, end_ids)
        pulls = np.zeros((num, n_arms), dtype=np.int64)
        sums = np.zeros((num, n_arms), dtype=np.float64)
        pref = np.empty(block_len + 1, dtype=np.float64)
        steps, fired, regret = _block_engine(
            means, reward_u, best, t, T, n_arms,
            starts, lengths, num, active_map, end_ptr, end_ids,
            base_kind, tol, c, form, aln,
            thr1_base, thr2_base, debug_scale,
            pulls, sums, pref, trace, regret,
            active_out, arm_out, f_out)
        t += steps
        if fired:
            declared += 1
        if not fixed_n:
            n_cur += 1
    return declared


@dataclass
class MasterConfig:
    rho_form: str = "mab"
    base_alg: str = "klucb"
    fixed_n: bool = True
    delta: float | None = None  # None means 1/T
    debug_threshold_scale: float = 1.0
    klucb_tolerance: float = 1e-6
    klucb_c: float = 0.0

    def resolve_delta(self, T: int) -> float:
        d = 1.0 / T if self.delta is None else float(self.delta)
        if not 0.0 < d < 1.0:
            raise ValueError("master delta must lie in (0, 1)")
        return d


def block_order(T: int, fixed_n: bool) -> int:
    return int(math.floor(math.log2(T))) if fixed_n else 0


def schedule_block(n: int, t_n: int, rho_cfg: RhoConfig, rng: np.random.Generator):
    """Sample one block's instances as (scale m, start time, end time) rows."""
    if n < 0:
        raise ValueError("n must be >= 0")
    block_len = 1 << n
    starts = np.empty(2 * block_len, dtype=np.int64)
    lengths = np.empty(2 * block_len, dtype=np.int64)
    active_map = np.empty(block_len, dtype=np.int64)
    num = _schedule_block(rng, n, rho_form_code(rho_cfg.form), rho_cfg.aln,
                          starts, lengths, active_map)
    out = []
    for i in range(num):
        m = int(math.log2(lengths[i]))
        out.append((m, t_n + int(starts[i]), t_n + int(starts[i]) + int(lengths[i]) - 1))
    return out, active_map


@dataclass
class MasterRun:
    declared_changes: int
    restarts: int


def run_master(realization, n_arms: int, cfg: MasterConfig, alg_gen: np.random.Generator,
               trace: np.ndarray, instrument: dict | None = None) -> MasterRun:
    """Play one full trial of MASTER against a fixed environment realization."""
    T = realization.means.shape[0]
    delta = cfg.resolve_delta(T)
    rho_cfg = RhoConfig(cfg.rho_form, n_arms, T, delta)
    thr1, thr2 = test_threshold_bases(T, delta)
    if instrument is not None:
        active_out = np.full(T, -1, dtype=np.int64)
        arm_out = np.full(T, -1, dtype=np.int64)
        f_out = np.full(T, np.nan, dtype=np.float64)
    else:
        active_out = np.empty(0, dtype=np.int64)
        arm_out = np.empty(0, dtype=np.int64)
        f_out = np.empty(0, dtype=np.float64)
    declared = _master_trial(
        realization.means, realization.reward_u, realization.best, alg_gen,
        n_arms, block_order(T, cfg.fixed_n), cfg.fixed_n,
        rho_form_code(cfg.rho_form), rho_cfg.aln, policy_kind(cfg.base_alg),
        cfg.klucb_tolerance, cfg.klucb_c,
        thr1, thr2, cfg.debug_threshold_scale,
        trace, active_out, arm_out, f_out)
    if instrument is not None:
        instrument["active"] = active_out
        instrument["arm"] = arm_out
        instrument["f_tilde"] = f_out
    return MasterRun(declared_changes=int(declared), restarts=int(declared))
