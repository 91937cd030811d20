"""Bandit environments and regret bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataError, EndOfData
from .stable import StableParams, sample

__all__ = [
    "SyntheticEnv",
    "ReplayEnv",
    "RegretTrace",
    "synth_env_from_prior",
    "step",
    "record_regret",
    "bayes_regret",
    "RegretCurve",
]


class SyntheticEnv:
    """Arms with S_alpha(sigma, beta, mu_n) rewards.

    Each arm draws from its own random stream, so the k-th reward of an arm
    is the same whichever policy asks for it (common random numbers).
    """

    _CHUNK = 256

    def __init__(self, params: Sequence[StableParams], arm_rngs: Sequence[np.random.Generator]):
        if len(params) < 1:
            raise ConfigError("need at least one arm")
        if len(arm_rngs) != len(params):
            raise ConfigError("one random stream per arm is required")
        self.params = list(params)
        self._rngs = list(arm_rngs)
        self._buffers = [np.empty(0) for _ in params]
        self._pos = [0] * len(params)

    @property
    def n_arms(self) -> int:
        return len(self.params)

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mu for p in self.params])

    @property
    def mu_star(self) -> float:
        return float(self.means.max())

    def step(self, arm_index: int, rng: Optional[np.random.Generator] = None) -> float:
        if rng is not None:
            return float(sample(self.params[arm_index], 1, rng)[0])
        pos = self._pos[arm_index]
        buf = self._buffers[arm_index]
        if pos == buf.size:
            buf = sample(self.params[arm_index], self._CHUNK, self._rngs[arm_index])
            self._buffers[arm_index] = buf
            pos = 0
        self._pos[arm_index] = pos + 1
        return float(buf[pos])


def synth_env_from_prior(n_arms: int, alpha: float, beta: float, sigma: float,
                         location_range: tuple[float, float], rng: np.random.Generator,
                         spacing: str = "random") -> SyntheticEnv:
    """Draw arm locations from ``location_range`` and build the environment.

    ``spacing="equal"`` places the locations on an even grid instead.
    The generator ``rng`` seeds both the locations and the per-arm reward
    streams.
    """
    if n_arms < 1:
        raise ConfigError("n_arms must be >= 1")
    lo, hi = location_range
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo or (hi == lo and n_arms > 1):
        raise ConfigError(f"empty location range {location_range}")
    if spacing == "random":
        locs = rng.uniform(lo, hi, size=n_arms)
    elif spacing == "equal":
        locs = np.linspace(lo, hi, n_arms)
    else:
        raise ConfigError(f"unknown spacing {spacing!r}")
    seeds = rng.bit_generator.seed_seq.spawn(n_arms) if rng.bit_generator.seed_seq else None
    if seeds is None:
        arm_rngs = [np.random.default_rng(int(s)) for s in rng.integers(0, 2**63, size=n_arms)]
    else:
        arm_rngs = [np.random.default_rng(s) for s in seeds]
    params = [StableParams(alpha, beta, sigma, float(m)) for m in locs]
    return SyntheticEnv(params, arm_rngs)


class ReplayEnv:
    """Serves recorded columns as arm rewards, one row per pull of that arm.

    Column means (times ``reward_sign``) stand in for the unknown locations
    when computing regret.
    """

    def __init__(self, matrix, reward_sign: int = 1):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DataError("replay matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(m)):
            bad = np.argwhere(~np.isfinite(m))[0]
            raise DataError(f"non-finite entry at row {bad[0]}, column {bad[1]}")
        if reward_sign not in (1, -1):
            raise ConfigError("reward_sign must be +1 or -1")
        self.matrix = m
        self.reward_sign = reward_sign
        self.cursor = [0] * m.shape[1]

    @property
    def n_arms(self) -> int:
        return self.matrix.shape[1]

    @property
    def means(self) -> np.ndarray:
        return self.reward_sign * self.matrix.mean(axis=0)

    @property
    def mu_star(self) -> float:
        return float(self.means.max())

    def step(self, arm_index: int, rng: Optional[np.random.Generator] = None) -> float:
        pos = self.cursor[arm_index]
        if pos >= self.matrix.shape[0]:
            raise EndOfData(arm_index)
        self.cursor[arm_index] = pos + 1
        return float(self.reward_sign * self.matrix[pos, arm_index])


def step(env, arm_index: int, rng: Optional[np.random.Generator] = None) -> float:
    return env.step(arm_index, rng)


@dataclass
class RegretTrace:
    """Per-round log of one (policy, seed) run."""

    policy: str
    seed: int
    arms: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    inst_regret: list = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.arms)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, len(self.arms) + 1)

    @property
    def cum_regret(self) -> np.ndarray:
        return np.cumsum(np.asarray(self.inst_regret, dtype=float))

    def rows(self):
        cum = 0.0
        for i, (a, r, g) in enumerate(zip(self.arms, self.rewards, self.inst_regret)):
            cum += g
            yield (self.policy, self.seed, i + 1, a, r, g, cum)


def record_regret(trace: RegretTrace, env, arm_index: int, reward: float, t: int) -> RegretTrace:
    """Append round ``t``; instantaneous regret is mu* - mu_a."""
    if t != len(trace) + 1:
        raise ValueError(f"round {t} recorded out of order (trace has {len(trace)} rows)")
    means = env.means
    trace.arms.append(int(arm_index))
    trace.rewards.append(float(reward))
    trace.inst_regret.append(float(means.max() - means[arm_index]))
    return trace


@dataclass
class RegretCurve:
    policy: str
    t: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_seeds: int

    @property
    def final(self) -> tuple[float, float, float]:
        return float(self.mean[-1]), float(self.lower[-1]), float(self.upper[-1])


def bayes_regret(traces: Sequence[RegretTrace], z: float = 1.96) -> RegretCurve:
    """Seed-averaged cumulative regret with a normal-approximation CI."""
    if len(traces) < 2:
        raise ValueError("need at least two traces")
    names = {tr.policy for tr in traces}
    if len(names) != 1:
        raise ValueError(f"cannot aggregate traces of different policies: {sorted(names)}")
    horizon = min(len(tr) for tr in traces)
    if horizon < 1:
        raise ValueError("traces are empty")
    cum = np.stack([tr.cum_regret[:horizon] for tr in traces])
    mean = cum.mean(axis=0)
    half = z * cum.std(axis=0, ddof=1) / math.sqrt(len(traces))
    return RegretCurve(names.pop(), np.arange(1, horizon + 1), mean, mean - half, mean + half,
                       len(traces))
