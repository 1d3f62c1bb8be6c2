"""Restarting wrappers around a stationary bandit policy.

Four ways to forget the past:

  RR        resets at precomputed times with i.i.d. Geometric(eta_r) gaps,
            eta_r = sqrt(eta / ln T) when auto-configured from the
            environment's change rate eta.
  RR_p      resets independently each step with fixed probability p.
  QCD+      runs one change detector per arm on that arm's reward stream;
            any detection triggers a global restart (all arms reset) and
            counts one declared change.
  GLRklUCB  QCD+ plus deterministic round-robin forced exploration: with
            cycle length C = ceil(A / alpha), the first A steps of every
            cycle (counted since the last restart) pull arms 0..A-1.

All wrappers reset every arm simultaneously; the policy clock restarts at
1 after a reset. Each wrapper exists twice: a per-step class built from
ArmHistory/GlrDetector (clear, slow, for interactive use and as the
reference in equivalence tests) and a numba kernel over a precomputed
environment realization (the harness path). Tests assert the two produce
identical pull/reward traces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .envs import EnvState, Realization
from .glr import GlrDetector, _glr_scan, xlogx_table
from .policies import ArmHistory, PolicyConfig, _select, policy_kind, select_arm


def auto_eta_r(T: int, cp_model: str, param: float) -> float:
    """Restart rate sqrt(eta / ln T) from the change-point process.

    eta is T^-xi for the geometric model, N_C/T for the deterministic one,
    and 1/T when there are no changes (single-segment reading). Raises if
    the resulting rate leaves (0, 1).
    """
    if T < 2:
        raise ValueError("T must be >= 2")
    if cp_model == "geometric":
        if not 0.0 < param < 1.0:
            raise ValueError("geometric model needs xi in (0, 1)")
        eta = T ** (-param)
    elif cp_model == "deterministic":
        if not 1 <= param < T:
            raise ValueError("deterministic model needs 1 <= n_changes < T")
        eta = param / T
    elif cp_model == "none":
        eta = 1.0 / T
    else:
        raise ValueError(f"unknown change-point model {cp_model!r}")
    eta_r = math.sqrt(eta / math.log(T))
    if not 0.0 < eta_r < 1.0:
        raise ValueError(f"restart rate eta_r={eta_r:.6g} outside (0, 1); horizon too small for this change rate")
    return eta_r


def auto_alpha(T: int, n_arms: int) -> float:
    """Forced-exploration rate sqrt(A * ln T / T), clipped below 1."""
    if T < 2 or n_arms < 1:
        raise ValueError("need T >= 2 and n_arms >= 1")
    a = math.sqrt(n_arms * math.log(T) / T)
    if a >= 1.0:
        raise ValueError("horizon too small: forced-exploration rate would reach 1")
    return a


def forced_cycle(n_arms: int, alpha: float) -> int:
    """Cycle length ceil(A/alpha); 0 disables forced exploration (alpha=0)."""
    if alpha == 0.0:
        return 0
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return int(math.ceil(n_arms / alpha))


def geo_restart_times(T: int, eta_r: float, rng: np.random.Generator) -> np.ndarray:
    """1-indexed restart times with i.i.d. Geometric(eta_r) gaps, within [1, T]."""
    if not 0.0 < eta_r < 1.0:
        raise ValueError("eta_r must lie in (0, 1)")
    times = []
    t = 0
    while True:
        t += int(rng.geometric(eta_r))
        if t > T:
            break
        times.append(t)
    return np.asarray(times, dtype=np.int64)


def restart_flags_from_times(T: int, times: np.ndarray) -> np.ndarray:
    flags = np.zeros(T, dtype=np.bool_)
    flags[times - 1] = True
    return flags


def per_step_restart_flags(T: int, p: float, rng: np.random.Generator) -> np.ndarray:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return rng.random(T) < p


@njit(cache=True, nogil=True)
def _flagged_trial(means, reward_u, best, flags, n_arms, base_kind, tol, c, trace):
    """Shared RR / RR_p engine: reset whenever this step's flag is set."""
    T = means.shape[0]
    pulls = np.zeros(n_arms, dtype=np.int64)
    sums = np.zeros(n_arms, dtype=np.float64)
    since = 0
    restarts = 0
    regret = 0.0
    for t in range(T):
        if flags[t]:
            pulls[:] = 0
            sums[:] = 0
            since = 0
            restarts += 1
        arm, _ = _select(pulls, sums, n_arms, float(since + 1), base_kind, tol, c)
        r = 1.0 if reward_u[t] < means[t, arm] else 0.0
        pulls[arm] += 1
        sums[arm] += r
        since += 1
        regret += best[t] - means[t, arm]
        trace[t] = regret
    return restarts


@njit(cache=True, nogil=True)
def _detecting_trial(means, reward_u, best, n_arms, base_kind, tol, c,
                     beta_c, stride, detect_on, cycle, prefix, table, trace):
    """QCD+ / GLRklUCB engine; cycle=0 means no forced exploration."""
    T = means.shape[0]
    pulls = np.zeros(n_arms, dtype=np.int64)
    sums = np.zeros(n_arms, dtype=np.float64)
    nsamp = np.zeros(n_arms, dtype=np.int64)
    since = 0
    tau = 0
    declared = 0
    restarts = 0
    regret = 0.0
    for t in range(T):
        if cycle > 0 and tau % cycle < n_arms:
            arm = tau % cycle
        else:
            arm, _ = _select(pulls, sums, n_arms, float(since + 1), base_kind, tol, c)
        r = 1.0 if reward_u[t] < means[t, arm] else 0.0
        pulls[arm] += 1
        sums[arm] += r
        since += 1
        tau += 1
        n = nsamp[arm]
        prefix[arm, n + 1] = prefix[arm, n] + np.int64(r)
        nsamp[arm] = n + 1
        regret += best[t] - means[t, arm]
        trace[t] = regret
        if detect_on and nsamp[arm] >= 2 and nsamp[arm] % stride == 0:
            stat, _ = _glr_scan(prefix[arm], nsamp[arm], table)
            if stat >= beta_c + 1.5 * math.log(nsamp[arm]):
                pulls[:] = 0
                sums[:] = 0
                nsamp[:] = 0
                since = 0
                tau = 0
                declared += 1
                restarts += 1
    return declared, restarts


@dataclass
class WrapperRun:
    declared_changes: int
    restarts: int


def run_rr(real: Realization, n_arms: int, policy: PolicyConfig, eta_r: float,
           alg_gen: np.random.Generator, trace: np.ndarray) -> WrapperRun:
    times = geo_restart_times(real.means.shape[0], eta_r, alg_gen)
    flags = restart_flags_from_times(real.means.shape[0], times)
    restarts = _flagged_trial(real.means, real.reward_u, real.best, flags, n_arms,
                              policy.kind_code, policy.klucb_tolerance,
                              policy.klucb_exploration_c, trace)
    return WrapperRun(declared_changes=0, restarts=int(restarts))


def run_rr_p(real: Realization, n_arms: int, policy: PolicyConfig, p: float,
             alg_gen: np.random.Generator, trace: np.ndarray) -> WrapperRun:
    flags = per_step_restart_flags(real.means.shape[0], p, alg_gen)
    restarts = _flagged_trial(real.means, real.reward_u, real.best, flags, n_arms,
                              policy.kind_code, policy.klucb_tolerance,
                              policy.klucb_exploration_c, trace)
    return WrapperRun(declared_changes=0, restarts=int(restarts))


def _run_detecting(real: Realization, n_arms: int, policy: PolicyConfig,
                   delta: float, stride: int, alpha: float,
                   trace: np.ndarray) -> WrapperRun:
    T = real.means.shape[0]
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if delta < 0.0 or delta >= 1.0:
        raise ValueError("detector delta must lie in [0, 1); 0 disables detection")
    detect_on = delta > 0.0
    beta_c = math.log(4.0 / delta) if detect_on else np.inf
    cycle = forced_cycle(n_arms, alpha)
    prefix = np.zeros((n_arms, T + 1), dtype=np.int64)
    table = xlogx_table(T + 1)
    declared, restarts = _detecting_trial(
        real.means, real.reward_u, real.best, n_arms,
        policy.kind_code, policy.klucb_tolerance, policy.klucb_exploration_c,
        beta_c, stride, detect_on, cycle, prefix, table, trace)
    return WrapperRun(declared_changes=int(declared), restarts=int(restarts))


def run_qcd(real: Realization, n_arms: int, policy: PolicyConfig, delta: float,
            stride: int, trace: np.ndarray) -> WrapperRun:
    return _run_detecting(real, n_arms, policy, delta, stride, 0.0, trace)


def run_glrklucb(real: Realization, n_arms: int, policy: PolicyConfig, delta: float,
                 stride: int, alpha: float, trace: np.ndarray) -> WrapperRun:
    return _run_detecting(real, n_arms, policy, delta, stride, alpha, trace)


class _SteppingWrapper:
    """Common per-step machinery: history, policy clock, reset, counters."""

    def __init__(self, n_arms: int, policy: PolicyConfig | None = None):
        if n_arms < 1:
            raise ValueError("n_arms must be >= 1")
        self.n_arms = n_arms
        self.policy = policy or PolicyConfig()
        self.history = ArmHistory(n_arms)
        self.since_restart = 0
        self.declared_changes = 0
        self.restarts = 0
        self.t = 0

    def _reset_history(self):
        self.history.reset()
        self.since_restart = 0
        self.restarts += 1

    def _policy_arm(self) -> int:
        arm, _ = select_arm(self.history, self.since_restart + 1, self.policy)
        return arm

    def _choose(self) -> int:
        return self._policy_arm()

    def _maybe_restart_before(self):
        pass

    def _after_update(self, arm: int, reward: int):
        pass

    def step(self, env: EnvState) -> tuple[int, int]:
        self.t += 1
        self._maybe_restart_before()
        arm = self._choose()
        reward = env.step(arm)
        self.history.update(arm, reward)
        self.since_restart += 1
        self._after_update(arm, reward)
        return arm, reward


class RRAgent(_SteppingWrapper):
    """Restarts at precomputed times with Geometric(eta_r) gaps."""

    def __init__(self, n_arms: int, T: int, eta_r: float, rng: np.random.Generator,
                 policy: PolicyConfig | None = None):
        super().__init__(n_arms, policy)
        self.restart_times = set(geo_restart_times(T, eta_r, rng).tolist())

    def _maybe_restart_before(self):
        if self.t in self.restart_times:
            self._reset_history()


class RRPAgent(_SteppingWrapper):
    """Restarts each step independently with probability p."""

    def __init__(self, n_arms: int, p: float, rng: np.random.Generator,
                 policy: PolicyConfig | None = None):
        super().__init__(n_arms, policy)
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        self.p = p
        self.rng = rng

    def _maybe_restart_before(self):
        if self.rng.random() < self.p:
            self._reset_history()


class QcdPlusAgent(_SteppingWrapper):
    """Per-arm change detectors; any detection restarts everything."""

    def __init__(self, n_arms: int, delta: float, stride: int = 1,
                 policy: PolicyConfig | None = None):
        super().__init__(n_arms, policy)
        if delta < 0.0 or delta >= 1.0:
            raise ValueError("detector delta must lie in [0, 1); 0 disables detection")
        self.delta = delta
        self.stride = stride
        self.detectors = ([GlrDetector(delta, stride) for _ in range(n_arms)]
                          if delta > 0.0 else None)

    def _after_update(self, arm: int, reward: int):
        if self.detectors is None:
            return
        det = self.detectors[arm]
        det.append(reward)
        if det.detect():
            self._reset_history()
            for d in self.detectors:
                d.reset()
            self.declared_changes += 1


class GlrKlucbAgent(QcdPlusAgent):
    """QCD+ with round-robin forced exploration at rate alpha."""

    def __init__(self, n_arms: int, delta: float, alpha: float, stride: int = 1,
                 policy: PolicyConfig | None = None):
        super().__init__(n_arms, delta, stride, policy)
        self.cycle = forced_cycle(n_arms, alpha)
        self.tau = 0

    def _choose(self) -> int:
        if self.cycle > 0 and self.tau % self.cycle < self.n_arms:
            return self.tau % self.cycle
        return self._policy_arm()

    def _after_update(self, arm: int, reward: int):
        self.tau += 1
        before = self.restarts
        super()._after_update(arm, reward)
        if self.restarts != before:
            self.tau = 0
