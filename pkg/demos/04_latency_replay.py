"""Replay of recorded page-load delays: lower delay is a better arm.

Run: python demos/04_latency_replay.py

Uses the bundled latency matrix through its checksummed manifest, so the
data are exactly what ``alphats ingest`` produced.
"""

from pathlib import Path

import numpy as np

from alphats import estimate_all
from alphats.config import load_config
from alphats.harness import load_replay, run_cell

root = Path(__file__).resolve().parents[1]
cfg = load_config(root / "configs" / "latency_replay.yaml")
replay = load_replay(cfg)

m = replay.matrix
print(f"{m.shape[0]} rounds x {m.shape[1]} sites")
fit = estimate_all(-m[:, 0]).params
print(f"site 0 negated delays: alpha {fit.alpha:.2f}, beta {fit.beta:+.2f}, "
      f"sigma {fit.sigma:.2f}")
print(f"pooled model used by the policies: alpha {replay.params[0].alpha:.2f}, "
      f"beta {replay.params[0].beta:+.2f}")
best = np.argmin(m.mean(axis=0))
print(f"fastest site on average: column {replay.columns[best]} "
      f"({m[:, best].mean():.1f} ms)")

for pcfg in cfg.policies:
    trace = run_cell(cfg, pcfg, seed=0, replay=replay)
    print(f"  {pcfg.name:8s} regret after {len(trace)} rounds: {trace.cum_regret[-1]:9.1f} ms")
