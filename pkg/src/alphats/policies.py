"""Bandit policies behind a common select/update contract.

Every policy pulls each arm once in index order before its own selection
rule applies, and every argmax breaks ties toward the lowest index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DataError
from .posterior import GibbsState, PriorSpec, posterior_draw
from .stable import StableParams, Symmetrizer

__all__ = [
    "ArmState",
    "PolicyConfig",
    "Policy",
    "POLICY_KINDS",
    "update",
    "select_arm_ts_asym",
    "select_arm_ts_sym",
    "select_arm_greedy",
    "select_arm_ucb",
    "select_arm_robust_ucb",
    "truncated_ucb_index",
    "ucb_index",
]

POLICY_KINDS = ("ts_asym", "ts_sym", "greedy", "ucb", "robust_ucb", "random", "oracle")


class _Buffer:
    """Append-only float buffer with amortized O(1) growth."""

    def __init__(self, capacity=64):
        self._data = np.empty(capacity)
        self._n = 0

    def append(self, value):
        if self._n == self._data.size:
            grown = np.empty(2 * self._data.size)
            grown[: self._n] = self._data
            self._data = grown
        self._data[self._n] = value
        self._n += 1

    def view(self):
        return self._data[: self._n]

    def __len__(self):
        return self._n


@dataclass
class ArmState:
    """Per-arm bookkeeping shared by all policies."""

    history: _Buffer = field(default_factory=_Buffer)
    pull_count: int = 0
    symmetrizer: Optional[Symmetrizer] = None
    gibbs_state: Optional[GibbsState] = None
    stale: bool = True
    draw_pool: np.ndarray = field(default_factory=lambda: np.empty(0))
    _sum: float = 0.0
    _comp: float = 0.0

    @property
    def reward_history(self) -> np.ndarray:
        return self.history.view()

    @property
    def running_mean(self) -> float:
        if self.pull_count == 0:
            return 0.0
        return (self._sum + self._comp) / self.pull_count

    @property
    def symmetrize_carry(self) -> list:
        return [] if self.symmetrizer is None else list(self.symmetrizer.carry)


def update(arm: ArmState, reward: float) -> ArmState:
    """Record one reward on ``arm`` (in place) and return it."""
    reward = float(reward)
    if not math.isfinite(reward):
        raise DataError(f"non-finite reward {reward!r}")
    arm.history.append(reward)
    arm.pull_count += 1
    # Neumaier-compensated running sum
    total = arm._sum + reward
    if abs(arm._sum) >= abs(reward):
        arm._comp += (arm._sum - total) + reward
    else:
        arm._comp += (reward - total) + arm._sum
    arm._sum = total
    if arm.symmetrizer is not None:
        arm.symmetrizer.feed(reward)
    arm.stale = True
    return arm


@dataclass(frozen=True)
class PolicyConfig:
    """Hyperparameters for one policy.

    ``epsilon_explore`` is the greedy exploration rate; ``epsilon_moment``
    is the moment order used by the truncated UCB index (defaults to
    0.9 (alpha - 1)).
    """

    kind: str
    name: str = ""
    epsilon_explore: float = 0.1
    clip_bound: float = 1e6
    epsilon_moment: Optional[float] = None
    concentration: float = 1.0
    mcmc_budget: int = 25
    refresh_every: int = 50
    prior: Optional[PriorSpec] = None
    posterior_mode: str = "raw"

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if not 0.0 <= self.epsilon_explore <= 1.0:
            raise ValueError("epsilon_explore must lie in [0, 1]")
        if not self.clip_bound > 0:
            raise ValueError("clip_bound must be positive")
        if not self.concentration > 0:
            raise ValueError("concentration must be positive")
        if self.epsilon_moment is not None and not self.epsilon_moment > 0:
            raise ValueError("epsilon_moment must be positive")
        if self.mcmc_budget < 1:
            raise ValueError("mcmc_budget must be >= 1")
        if self.refresh_every < 1:
            raise ValueError("refresh_every must be >= 1")
        if self.posterior_mode not in ("raw", "symmetrized"):
            raise ValueError("posterior_mode must be 'raw' or 'symmetrized'")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    @property
    def location_prior(self) -> PriorSpec:
        return self.prior if self.prior is not None else PriorSpec.flat(self.clip_bound)

    def moment_order(self, alpha: float) -> float:
        eps = 0.9 * (alpha - 1.0) if self.epsilon_moment is None else self.epsilon_moment
        if not 0.0 < eps < alpha - 1.0:
            raise ValueError(f"epsilon_moment must lie in (0, alpha - 1) = (0, {alpha - 1.0})")
        return eps


def _argmax(values) -> int:
    return int(np.argmax(np.asarray(values, dtype=float)))


def _first_unpulled(arms: Sequence[ArmState]) -> Optional[int]:
    for i, arm in enumerate(arms):
        if arm.pull_count == 0:
            return i
    return None


def _posterior_sample(arm: ArmState, params: StableParams, beta: float, cfg: PolicyConfig,
                      rng: np.random.Generator, t: int) -> float:
    """Thompson draw for one arm with warm-started, amortized chains."""
    alpha, sigma = params.alpha, params.sigma
    prior = cfg.location_prior
    if cfg.posterior_mode == "symmetrized":
        if arm.symmetrizer is None:
            arm.symmetrizer = Symmetrizer(alpha)
            arm.symmetrizer.feed(arm.reward_history)
        data = np.asarray(arm.symmetrizer.values)
        factor = 2.0 - 2.0 ** (1.0 / alpha)
        if data.size == 0:
            return prior.draw(rng)
        beta, sigma = 0.0, 4.0 ** (1.0 / alpha) * sigma
        lo, hi = prior.bounds
        prior = PriorSpec(kind="flat", low=lo * factor, high=hi * factor) if prior.kind == "flat" \
            else PriorSpec.gaussian(prior.mean * factor, prior.std * factor)
    else:
        data = arm.reward_history
        factor = 1.0
    refresh = arm.stale or arm.draw_pool.size == 0 or t % cfg.refresh_every == 0
    if refresh:
        if arm.gibbs_state is None:
            arm.gibbs_state = GibbsState.start(data, prior, rng)
        state = arm.gibbs_state
        state.rng = rng
        draws = np.empty(cfg.mcmc_budget)
        for i in range(cfg.mcmc_budget):
            draws[i] = posterior_draw(data, (alpha, beta, sigma), prior, 1, state)
        arm.draw_pool = draws
        arm.stale = False
        theta = draws[-1]
    else:
        theta = arm.draw_pool[rng.integers(arm.draw_pool.size)]
    return float(theta) / factor


def _select_ts(arms, params_per_arm, cfg, rng, t, symmetric):
    first = _first_unpulled(arms)
    if first is not None:
        return first
    draws = [
        _posterior_sample(arm, p, 0.0 if symmetric else p.beta, cfg, rng, t)
        for arm, p in zip(arms, params_per_arm)
    ]
    return _argmax(draws)


def select_arm_ts_asym(arms: Sequence[ArmState], params_per_arm: Sequence[StableParams],
                       cfg: PolicyConfig, rng: np.random.Generator, t: int) -> int:
    """Thompson sampling on the location under the skewed stable likelihood."""
    return _select_ts(arms, params_per_arm, cfg, rng, t, symmetric=False)


def select_arm_ts_sym(arms: Sequence[ArmState], params_per_arm: Sequence[StableParams],
                      cfg: PolicyConfig, rng: np.random.Generator, t: int) -> int:
    """Thompson sampling that treats every arm as symmetric (beta = 0)."""
    return _select_ts(arms, params_per_arm, cfg, rng, t, symmetric=True)


def select_arm_greedy(arms: Sequence[ArmState], cfg: PolicyConfig, rng: np.random.Generator,
                      t: int) -> int:
    first = _first_unpulled(arms)
    if first is not None:
        return first
    if cfg.epsilon_explore > 0 and rng.random() < cfg.epsilon_explore:
        return int(rng.integers(len(arms)))
    return _argmax([a.running_mean for a in arms])


def ucb_index(arm: ArmState, t: int) -> float:
    return arm.running_mean + math.sqrt(2.0 * math.log(t) / arm.pull_count)


def select_arm_ucb(arms: Sequence[ArmState], t: int) -> int:
    """Mean plus sqrt(2 log t / n) bonus; unpulled arms first."""
    if t < 1:
        raise ValueError("t must be >= 1")
    first = _first_unpulled(arms)
    if first is not None:
        return first
    return _argmax([ucb_index(a, t) for a in arms])


def truncated_ucb_index(arm: ArmState, cfg: PolicyConfig, sigma: float, alpha: float) -> float:
    """Clipped index r + sigma^(1/alpha) (2 C / n^eps)^(1/(1+eps)) on [-M, M]."""
    if arm.pull_count < 1:
        raise ValueError("truncated UCB index needs at least one pull")
    eps = cfg.moment_order(alpha)
    bonus = sigma ** (1.0 / alpha) * (2.0 * cfg.concentration / arm.pull_count ** eps) ** (
        1.0 / (1.0 + eps)
    )
    m = cfg.clip_bound
    return float(min(max(arm.running_mean + bonus, -m), m))


def select_arm_robust_ucb(arms: Sequence[ArmState], params_per_arm: Sequence[StableParams],
                          cfg: PolicyConfig) -> int:
    first = _first_unpulled(arms)
    if first is not None:
        return first
    return _argmax(
        [truncated_ucb_index(a, cfg, p.sigma, p.alpha) for a, p in zip(arms, params_per_arm)]
    )


class Policy:
    """Stateful wrapper: owns the arm states and one random stream.

    ``params_per_arm`` holds the (assumed known) stable parameters used by
    the Thompson and truncated-UCB policies; ``means`` is consulted only
    by the ``oracle`` policy.
    """

    def __init__(self, cfg: PolicyConfig, n_arms: int, rng: np.random.Generator,
                 params_per_arm: Optional[Sequence[StableParams]] = None,
                 means: Optional[Sequence[float]] = None):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        needs_params = cfg.kind in ("ts_asym", "ts_sym", "robust_ucb")
        if needs_params and (params_per_arm is None or len(params_per_arm) != n_arms):
            raise ValueError(f"policy {cfg.kind!r} needs stable parameters for every arm")
        if cfg.kind == "oracle" and means is None:
            raise ValueError("oracle policy needs the arm means")
        self.cfg = cfg
        self.rng = rng
        self.params = list(params_per_arm) if params_per_arm is not None else None
        self.means = None if means is None else np.asarray(means, dtype=float)
        self.arms = [ArmState() for _ in range(n_arms)]
        if cfg.kind in ("ts_asym", "ts_sym") and cfg.posterior_mode == "symmetrized":
            for arm, p in zip(self.arms, self.params):
                arm.symmetrizer = Symmetrizer(p.alpha)

    @property
    def name(self) -> str:
        return self.cfg.name

    def select(self, t: int) -> int:
        kind = self.cfg.kind
        if kind == "ts_asym":
            return select_arm_ts_asym(self.arms, self.params, self.cfg, self.rng, t)
        if kind == "ts_sym":
            return select_arm_ts_sym(self.arms, self.params, self.cfg, self.rng, t)
        if kind == "greedy":
            return select_arm_greedy(self.arms, self.cfg, self.rng, t)
        if kind == "ucb":
            return select_arm_ucb(self.arms, t)
        if kind == "robust_ucb":
            return select_arm_robust_ucb(self.arms, self.params, self.cfg)
        if kind == "random":
            return int(self.rng.integers(len(self.arms)))
        return _argmax(self.means)

    def observe(self, arm_index: int, reward: float) -> None:
        update(self.arms[arm_index], reward)


def with_name(cfg: PolicyConfig, name: str) -> PolicyConfig:
    return replace(cfg, name=name)
