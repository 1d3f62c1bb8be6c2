"""Piecewise-stationary Bernoulli bandit environments.

Two change-point models:
  * geometric: inter-change gaps i.i.d. Geometric(eta) with eta = T^(-xi),
    starting from nu(0) = 1, truncated at the horizon;
  * deterministic: N_C points spaced round(T / N_C) steps apart (round half
    up), the first change after one full segment.

Two mean dynamics:
  * uniform: means start i.i.d. U[0,1]; at each change a uniformly chosen
    number of arms (2..A) each move by a U[0.1, 0.4] magnitude with a random
    sign; moves that would leave [0, 1] flip direction instead;
  * worst: means start at 0.3 plus i.i.d. U[0.0005, 0.005] offsets; at each
    change the lowest arm jumps to the current maximum plus a U[0.005, 0.05]
    gap, so the optimal arm always rotates; once that jump would pass 0.99
    all means re-initialize, with the previously lowest arm handed the
    largest fresh offset.

Randomness is consumed from the environment stream in a fixed documented
order (schedule gaps, initial means, change draws in time order, then one
reward uniform per step), so the mean trajectory and rewards for a given
seed never depend on the algorithm playing against them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PROBLEMS = ("uniform", "worst")
CP_MODELS = ("geometric", "deterministic", "none")


@dataclass
class ChangeSchedule:
    horizon: int
    points: np.ndarray
    model: str
    param: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.int64)
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.model not in CP_MODELS:
            raise ValueError(f"unknown change-point model {self.model!r}")
        if self.points.size:
            if not (np.diff(self.points) > 0).all():
                raise ValueError("change points must be strictly increasing")
            if self.points[0] < 2 or self.points[-1] > self.horizon:
                raise ValueError("change points must lie in [2, horizon]")


def sample_geometric_changepoints(T: int, xi: float, rng: np.random.Generator) -> ChangeSchedule:
    """Change times with i.i.d. Geometric(T^-xi) gaps, support {1, 2, ...}."""
    if T < 2:
        raise ValueError("T must be >= 2")
    if not 0.0 < xi < 1.0:
        raise ValueError("xi must lie strictly inside (0, 1) so that eta = T^-xi < 1")
    eta = float(T) ** (-xi)
    points = []
    t = 1
    while True:
        t += int(rng.geometric(eta))
        if t > T:
            break
        points.append(t)
    return ChangeSchedule(T, np.asarray(points, dtype=np.int64), "geometric", xi)


def deterministic_changepoints(T: int, n_c: int) -> ChangeSchedule:
    """N_C change times spaced round(T / N_C) apart, truncated at T."""
    if T < 2:
        raise ValueError("T must be >= 2")
    if not 1 <= n_c < T:
        raise ValueError("n_c must satisfy 1 <= n_c < T")
    spacing = int(math.floor(T / n_c + 0.5))
    points = []
    for k in range(1, n_c + 1):
        p = 1 + k * spacing
        if p > T:
            break
        points.append(p)
    return ChangeSchedule(T, np.asarray(points, dtype=np.int64), "deterministic", float(n_c))


def init_means(problem: str, n_arms: int, rng: np.random.Generator) -> np.ndarray:
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if n_arms < 1:
        raise ValueError("init_means requires at least 1 arm")
    if problem == "uniform":
        return rng.random(n_arms)
    return 0.3 + rng.uniform(0.0005, 0.005, n_arms)


def _uniform_change(means: np.ndarray, rng: np.random.Generator) -> None:
    n_arms = means.size
    if n_arms < 2:
        return
    count = int(rng.integers(2, n_arms + 1))
    changed = rng.permutation(n_arms)[:count]
    for arm in changed:
        magnitude = rng.uniform(0.1, 0.4)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        proposed = means[arm] + sign * magnitude
        if proposed > 1.0:
            proposed = means[arm] - magnitude
        elif proposed < 0.0:
            proposed = means[arm] + magnitude
        means[arm] = proposed


def _worst_change(means: np.ndarray, rng: np.random.Generator) -> None:
    if means.size < 2:
        return
    lowest = int(np.argmin(means))
    gap = rng.uniform(0.005, 0.05)
    proposed = means.max() + gap
    if proposed > 0.99:
        offsets = rng.uniform(0.0005, 0.005, means.size)
        top = int(np.argmax(offsets))
        offsets[top], offsets[lowest] = offsets[lowest], offsets[top]
        means[:] = 0.3 + offsets
    else:
        means[lowest] = proposed


def apply_change(problem: str, means: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Apply one change-point update in place and return the means."""
    if problem == "uniform":
        _uniform_change(means, rng)
    elif problem == "worst":
        _worst_change(means, rng)
    else:
        raise ValueError(f"unknown problem {problem!r}")
    if (means < 0).any() or (means > 1).any():
        raise AssertionError("mean update left [0, 1]")
    return means


@dataclass
class Realization:
    """One trial's full environment trajectory.

    means[t-1, a] is the mean of arm a at step t; best is the row max;
    reward_u[t-1] is the uniform draw that thresholds into the step-t
    reward (reward = 1 iff reward_u < mean of the pulled arm).
    """
    means: np.ndarray
    best: np.ndarray
    reward_u: np.ndarray
    schedule: ChangeSchedule


def build_realization(T: int, n_arms: int, problem: str, cp_model: str, param: float,
                      rng: np.random.Generator, means0=None) -> Realization:
    if cp_model == "geometric":
        schedule = sample_geometric_changepoints(T, float(param), rng)
    elif cp_model == "deterministic":
        schedule = deterministic_changepoints(T, int(param))
    elif cp_model == "none":
        schedule = ChangeSchedule(T, np.empty(0, dtype=np.int64), "none", 0.0)
    else:
        raise ValueError(f"unknown change-point model {cp_model!r}")

    if means0 is not None:
        current = np.asarray(means0, dtype=np.float64).copy()
        if current.size != n_arms:
            raise ValueError("means0 length must equal the arm count")
        if (current < 0).any() or (current > 1).any():
            raise ValueError("means0 must lie in [0, 1]")
    else:
        current = init_means(problem, n_arms, rng)

    means = np.empty((T, n_arms), dtype=np.float64)
    prev = 1
    for point in schedule.points:
        means[prev - 1: point - 1] = current
        apply_change(problem, current, rng)
        prev = int(point)
    means[prev - 1:] = current

    reward_u = rng.random(T)
    return Realization(means=means, best=means.max(axis=1), reward_u=reward_u, schedule=schedule)


@dataclass
class OracleTrace:
    best_mean: list = field(default_factory=list)
    chosen_mean: list = field(default_factory=list)


class EnvState:
    """Stepwise view over a Realization, for interactive (non-kernel) use.

    step(arm) serves the Bernoulli reward for the current step, records the
    oracle quantities regret is computed from, and advances time. The mean
    trajectory is fixed at construction from the environment stream alone.
    """

    def __init__(self, T: int, n_arms: int, problem: str, cp_model: str, param: float,
                 rng: np.random.Generator, means0=None):
        self.realization = build_realization(T, n_arms, problem, cp_model, param, rng, means0)
        self.n_arms = n_arms
        self.horizon = T
        self.problem = problem
        self.t = 1
        self.oracle = OracleTrace()

    @classmethod
    def from_realization(cls, realization: Realization) -> "EnvState":
        state = cls.__new__(cls)
        state.realization = realization
        state.horizon, state.n_arms = realization.means.shape
        state.problem = "fixed"
        state.t = 1
        state.oracle = OracleTrace()
        return state

    @property
    def schedule(self) -> ChangeSchedule:
        return self.realization.schedule

    @property
    def means(self) -> np.ndarray:
        row = min(self.t, self.horizon) - 1
        return self.realization.means[row]

    def step(self, arm: int) -> int:
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm {arm} out of range for {self.n_arms} arms")
        if self.t > self.horizon:
            raise RuntimeError("environment exhausted: t > horizon")
        row = self.t - 1
        mean = self.realization.means[row, arm]
        reward = int(self.realization.reward_u[row] < mean)
        self.oracle.best_mean.append(float(self.realization.best[row]))
        self.oracle.chosen_mean.append(float(mean))
        self.t += 1
        return reward
