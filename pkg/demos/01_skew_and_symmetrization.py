"""Skewed stable rewards, and how combining three draws removes the skew.

Run: python demos/01_skew_and_symmetrization.py
"""

import numpy as np

from alphats import StableParams, estimate_all, location_from_symmetrized, sample, \
    symmetrized_values

rng = np.random.default_rng(0)
alpha, beta, mu = 1.3, -0.8, 5.0
x = sample(StableParams(alpha, beta, 1.0, mu), 60_000, rng)

# The sample mean exists for alpha > 1 but converges slowly, and the
# median sits well away from mu when the law is skewed.
print(f"draws from S_{alpha}(1, {beta}, {mu})")
print(f"  mean   {x.mean():8.3f}")
print(f"  median {np.median(x):8.3f}")

fit = estimate_all(x).params
print(f"  ECF fit: alpha {fit.alpha:.3f}  beta {fit.beta:+.3f}  sigma {fit.sigma:.3f}  "
      f"mu {fit.mu:.3f}")

# Weights (-2^(1/alpha), 1, 1) on consecutive triples give a law with
# zero skew and a known location multiple.
xd = symmetrized_values(x, alpha)
sym_fit = estimate_all(xd).params
print(f"\n{xd.size} symmetrized values")
print(f"  ECF beta      {sym_fit.beta:+.3f}")
se = xd.std(ddof=1) / np.sqrt(xd.size) / (2 - 2 ** (1 / alpha))
# heavy tails make this mean noisy; the standard error says how noisy
print(f"  location est. {location_from_symmetrized(xd.mean(), alpha):.3f} +/- {se:.3f}"
      f"  (true {mu})")
