"""Stationary index policies: UCB1 and klUCB over resettable arm histories.

These are the building blocks every meta-algorithm composes. The hot paths
are numba-compiled free functions operating on plain arrays so that the
same code serves both the python-level API (ArmHistory / select_arm) and
the per-trial simulation kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

UCB1 = 0
KLUCB = 1

_POLICY_KINDS = {"ucb1": UCB1, "klucb": KLUCB}


def policy_kind(name: str) -> int:
    try:
        return _POLICY_KINDS[name]
    except KeyError:
        raise ValueError(f"unknown policy kind {name!r}; expected one of {sorted(_POLICY_KINDS)}") from None


@dataclass
class PolicyConfig:
    kind: str = "klucb"
    klucb_tolerance: float = 1e-6
    klucb_exploration_c: float = 0.0

    def __post_init__(self):
        policy_kind(self.kind)
        if not self.klucb_tolerance > 0:
            raise ValueError("klucb_tolerance must be positive")
        if self.klucb_exploration_c < 0:
            raise ValueError("klucb_exploration_c must be non-negative")

    @property
    def kind_code(self) -> int:
        return policy_kind(self.kind)


@njit(cache=True, nogil=True, inline="always")
def _kl_bernoulli(p, q):
    # Conventions: 0*ln(0/x) = 0; +inf when q is degenerate and p != q.
    if p < 0.0 or p > 1.0 or q < 0.0 or q > 1.0:
        return np.nan
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return np.inf
    acc = 0.0
    if p > 0.0:
        acc += p * math.log(p / q)
    if p < 1.0:
        acc += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return acc


@njit(cache=True, nogil=True, inline="always")
def _klucb_budget(t, c):
    if c == 0.0:
        return math.log(t)
    return math.log(t) + c * math.log(math.log(max(t, 3.0)))


@njit(cache=True, nogil=True, inline="always")
def _klucb_index(mean_hat, pulls, t, tol, c):
    # Largest q in [mean_hat, 1] with pulls*kl(mean_hat, q) <= budget,
    # located by bisection; the interval shrinks below tol in <= 64 steps.
    if mean_hat >= 1.0:
        return 1.0
    target = _klucb_budget(t, c) / pulls
    if target <= 0.0:
        return mean_hat
    lo = mean_hat
    hi = 1.0
    for _ in range(64):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _kl_bernoulli(mean_hat, mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True, inline="always")
def _ucb1_index(mean_hat, pulls, t):
    return mean_hat + math.sqrt(2.0 * math.log(t) / pulls)


@njit(cache=True, nogil=True, inline="always")
def _select(pulls, sums, n_arms, t, kind, tol, c):
    """Pick an arm and the optimistic estimate f_tilde in [0, 1].

    Unpulled arms are force-pulled in index order with f_tilde = 1;
    otherwise the argmax of the configured index wins, ties to the
    lowest arm index, and f_tilde is the max index clipped to 1.
    """
    for a in range(n_arms):
        if pulls[a] == 0:
            return a, 1.0
    best_arm = 0
    best_idx = -np.inf
    for a in range(n_arms):
        mean_hat = sums[a] / pulls[a]
        if kind == UCB1:
            idx = _ucb1_index(mean_hat, pulls[a], t)
        else:
            idx = _klucb_index(mean_hat, pulls[a], t, tol, c)
        if idx > best_idx:
            best_idx = idx
            best_arm = a
    f_tilde = best_idx if best_idx < 1.0 else 1.0
    return best_arm, f_tilde


def kl_bernoulli(p: float, q: float) -> float:
    """Bernoulli KL divergence kl(p, q) with the usual edge conventions."""
    if math.isnan(p) or math.isnan(q):
        raise ValueError("kl_bernoulli: NaN input")
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("kl_bernoulli: arguments must lie in [0, 1]")
    return float(_kl_bernoulli(p, q))


def klucb_index(mean_hat: float, pulls: int, t: int, cfg: PolicyConfig | None = None) -> float:
    """Upper confidence index of klUCB at round t for an arm pulled `pulls` times."""
    if pulls < 1:
        raise ValueError("klucb_index requires pulls >= 1; unpulled arms are force-pulled instead")
    cfg = cfg or PolicyConfig()
    return float(_klucb_index(float(mean_hat), float(pulls), float(t),
                              cfg.klucb_tolerance, cfg.klucb_exploration_c))


def ucb1_index(mean_hat: float, pulls: int, t: int) -> float:
    if pulls < 1:
        raise ValueError("ucb1_index requires pulls >= 1")
    return float(_ucb1_index(float(mean_hat), float(pulls), float(t)))


@dataclass
class ArmHistory:
    """Per-arm pull counts and reward sums, with optional reward buffers.

    Buffers hold the raw 0/1 reward streams and exist only when a change
    detector needs them; plain policies skip the allocation.
    """
    n_arms: int
    buffering: bool = False
    pull_count: np.ndarray = field(init=False)
    reward_sum: np.ndarray = field(init=False)
    reward_buffer: list = field(init=False)

    def __post_init__(self):
        if self.n_arms < 1:
            raise ValueError("n_arms must be >= 1")
        self.pull_count = np.zeros(self.n_arms, dtype=np.int64)
        self.reward_sum = np.zeros(self.n_arms, dtype=np.float64)
        self.reward_buffer = [[] for _ in range(self.n_arms)] if self.buffering else []

    @property
    def total_pulls(self) -> int:
        return int(self.pull_count.sum())

    def update(self, arm: int, reward: float) -> None:
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm {arm} out of range for {self.n_arms} arms")
        self.pull_count[arm] += 1
        self.reward_sum[arm] += reward
        if self.buffering:
            self.reward_buffer[arm].append(int(reward))

    def reset(self) -> None:
        self.pull_count[:] = 0
        self.reward_sum[:] = 0.0
        if self.buffering:
            self.reward_buffer = [[] for _ in range(self.n_arms)]


def select_arm(history: ArmHistory, t: int, cfg: PolicyConfig | None = None) -> tuple[int, float]:
    """Return (arm, f_tilde) for round t under the configured index policy."""
    if t < 1:
        raise ValueError("t must be >= 1")
    cfg = cfg or PolicyConfig()
    arm, f_tilde = _select(history.pull_count, history.reward_sum, history.n_arms,
                           float(t), policy_kind(cfg.kind),
                           cfg.klucb_tolerance, cfg.klucb_exploration_c)
    return int(arm), float(f_tilde)
