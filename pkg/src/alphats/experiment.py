"""Simulation loop and seeding rules.

Seeding: for seed ``s`` under master seed ``m``

* environment (arm locations and reward streams): ``SeedSequence([m, s, 0])``
* policy named ``p``: ``SeedSequence([m, s, 1, crc32(p)])``

so every policy sees the same arms and the same reward sequence per arm,
and adding or renaming a policy never changes another policy's stream.
"""

from __future__ import annotations

import zlib

import numpy as np

from .env import RegretTrace, record_regret
from .errors import EndOfData
from .policies import Policy

__all__ = ["env_rng", "policy_rng", "simulate"]


def env_rng(seed: int, master_seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, seed, 0]))


def policy_rng(seed: int, policy_name: str, master_seed: int = 0) -> np.random.Generator:
    tag = zlib.crc32(policy_name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([master_seed, seed, 1, tag]))


def simulate(env, policy: Policy, horizon: int, seed: int = 0) -> RegretTrace:
    """Run ``policy`` on ``env`` for up to ``horizon`` rounds.

    A replay column running dry ends the run early with ``truncated`` set.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    trace = RegretTrace(policy=policy.name, seed=seed)
    for t in range(1, horizon + 1):
        arm = policy.select(t)
        try:
            reward = env.step(arm)
        except EndOfData:
            trace.truncated = True
            break
        policy.observe(arm, reward)
        record_regret(trace, env, arm, reward, t)
    return trace
