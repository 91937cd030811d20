"""A small skewed bandit: Thompson sampling against greedy and UCB.

Run: python demos/03_bandit_comparison.py   (under a minute)

The full-size experiment lives in configs/synthetic_skewed.yaml and runs
with ``alphats run --config configs/synthetic_skewed.yaml``.
"""

import numpy as np

from alphats import Policy, PolicyConfig, bayes_regret, env_rng, policy_rng, simulate, \
    synth_env_from_prior

K, HORIZON, SEEDS = 8, 400, 6
policies = [
    PolicyConfig(kind="ts_asym", mcmc_budget=3),
    PolicyConfig(kind="ts_sym", mcmc_budget=3),
    PolicyConfig(kind="greedy", epsilon_explore=0.1),
    PolicyConfig(kind="ucb"),
]

print(f"{K} arms, alpha 1.3, beta -0.5, sigma 1, locations in [0, 6], T = {HORIZON}")
for cfg in policies:
    traces = []
    for seed in range(SEEDS):
        # the same environment seed for every policy gives paired comparisons
        env = synth_env_from_prior(K, 1.3, -0.5, 1.0, (0.0, 6.0), env_rng(seed))
        pol = Policy(cfg, K, policy_rng(seed, cfg.name), params_per_arm=env.params,
                     means=env.means)
        traces.append(simulate(env, pol, HORIZON, seed))
    mean, lo, hi = bayes_regret(traces).final
    print(f"  {cfg.name:8s} final regret {mean:8.1f}  [{lo:7.1f}, {hi:7.1f}]")
