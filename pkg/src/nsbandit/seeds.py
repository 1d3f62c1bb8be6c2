"""Deterministic RNG stream derivation for parallel trials.

Every trial draws from generators derived from a single 64-bit master seed
through numpy's SeedSequence spawn-key mechanism, which is the documented
split function used throughout this package:

    trial i, environment stream:  SeedSequence(master_seed, spawn_key=(i, 0))
    trial i, algorithm stream:    SeedSequence(master_seed, spawn_key=(i, 1))

Distinct spawn keys give pairwise independent streams by construction, so
trials can run on any number of threads in any order and still reproduce
bit-identical results.
"""
from __future__ import annotations

import numpy as np

ENV_STREAM = 0
ALG_STREAM = 1


def stream(master_seed: int, trial_index: int, role: int) -> np.random.Generator:
    """Return the generator for one (trial, role) pair.

    role is ENV_STREAM for environment generation and reward sampling,
    ALG_STREAM for any randomness internal to the algorithm under test.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be a non-negative 64-bit integer")
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, role))
    return np.random.default_rng(ss)


def env_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    return stream(master_seed, trial_index, ENV_STREAM)


def alg_stream(master_seed: int, trial_index: int) -> np.random.Generator:
    return stream(master_seed, trial_index, ALG_STREAM)
