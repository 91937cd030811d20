"""Experiment orchestration: (policy, seed) cells, optional worker pool, CSV output."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ExperimentConfig, ReplayEnvConfig, SyntheticEnvConfig, load_manifest
from .env import RegretTrace, ReplayEnv, bayes_regret, synth_env_from_prior
from .errors import AlphaTSError, ConfigError, DataError
from .estimation import estimate_all
from .experiment import env_rng, policy_rng, simulate
from .io import TRACE_COLUMNS, read_matrix, write_rows
from .policies import Policy, PolicyConfig
from .stable import StableParams

log = logging.getLogger(__name__)

__all__ = [
    "WORKERS_ENV",
    "ReplayData",
    "load_replay",
    "fit_replay_params",
    "run_cell",
    "run_experiment",
    "summarize",
    "write_outputs",
    "worker_count",
]

WORKERS_ENV = "ALPHATS_WORKERS"
# the posterior tables are built for alpha < 2; a Gaussian-looking column is
# treated as very slightly heavy-tailed
_REPLAY_ALPHA_CAP = 1.99


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV}: expected a positive integer, got {raw!r}")
    return n


@dataclass(frozen=True)
class ReplayData:
    matrix: np.ndarray
    reward_sign: int
    params: tuple[StableParams, ...]
    columns: tuple[int, ...]


def fit_replay_params(matrix: np.ndarray, reward_sign: int) -> tuple[StableParams, ...]:
    """Per-column ECF fits with alpha and beta pooled by median.

    Sharing (alpha, beta) keeps every arm on one posterior table; sigma
    stays per arm.
    """
    fits = []
    for j in range(matrix.shape[1]):
        try:
            fits.append(estimate_all(reward_sign * matrix[:, j]).params)
        except AlphaTSError as exc:
            raise DataError(f"cannot fit column {j}: {exc}") from None
    alpha = min(float(np.median([f.alpha for f in fits])), _REPLAY_ALPHA_CAP)
    beta = float(np.median([f.beta for f in fits]))
    return tuple(StableParams(alpha, beta, f.sigma, f.mu) for f in fits)


def load_replay(cfg: ExperimentConfig) -> ReplayData:
    env_cfg: ReplayEnvConfig = cfg.environment
    path = cfg.dataset_path()
    if path.suffix in (".yaml", ".yml"):
        manifest, matrix_path = load_manifest(path)
        matrix, _ = read_matrix(matrix_path, delimiter=manifest.delimiter, header=manifest.header)
    else:
        matrix, _ = read_matrix(path, delimiter=env_cfg.delimiter, header=env_cfg.header)
    n_cols = matrix.shape[1]
    columns = env_cfg.columns if env_cfg.columns is not None else tuple(range(n_cols))
    missing = [c for c in columns if c >= n_cols]
    if missing:
        raise DataError(f"environment.columns: column {missing[0]} missing; "
                        f"{path} has {n_cols} columns")
    sub = matrix[:, list(columns)]
    if env_cfg.params is not None:
        a, b, s = env_cfg.params
        params = tuple(StableParams(a, b, s) for _ in columns)
    else:
        params = fit_replay_params(sub, env_cfg.reward_sign)
    return ReplayData(sub, env_cfg.reward_sign, params, tuple(columns))


def _build_env(cfg: ExperimentConfig, seed: int, replay: Optional[ReplayData]):
    if replay is not None:
        env = ReplayEnv(replay.matrix, replay.reward_sign)
        return env, list(replay.params)
    e: SyntheticEnvConfig = cfg.environment
    env = synth_env_from_prior(e.n_arms, e.alpha, e.beta, e.sigma, e.location_range,
                               env_rng(seed, cfg.master_seed), spacing=e.spacing)
    return env, env.params


def run_cell(cfg: ExperimentConfig, policy_cfg: PolicyConfig, seed: int,
             replay: Optional[ReplayData] = None) -> RegretTrace:
    """One full simulation of ``policy_cfg`` under ``seed``."""
    env, params = _build_env(cfg, seed, replay)
    rng = policy_rng(seed, policy_cfg.name, cfg.master_seed)
    policy = Policy(policy_cfg, env.n_arms, rng, params_per_arm=params, means=env.means)
    return simulate(env, policy, cfg.horizon, seed)


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None,
                   replay: Optional[ReplayData] = None) -> list[RegretTrace]:
    """All (policy, seed) cells, returned in config order whatever the worker count."""
    if cfg.is_replay and replay is None:
        replay = load_replay(cfg)
    cells = [(cfg, p, s, replay) for p in cfg.policies for s in cfg.seeds]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(cells) == 1:
        return [run_cell(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(_run_cell_args, cells))


SUMMARY_COLUMNS = ("policy", "n_seeds", "horizon", "mean_final_regret", "ci_low", "ci_high",
                   "truncated_runs")


def summarize(traces: Sequence[RegretTrace], policy_names: Sequence[str]):
    """Summary rows and mean-curve rows per policy, in ``policy_names`` order."""
    summary, curves = [], []
    for name in policy_names:
        group = [tr for tr in traces if tr.policy == name]
        truncated = sum(tr.truncated for tr in group)
        if len(group) >= 2:
            curve = bayes_regret(group)
            mean, lo, hi = curve.final
            horizon = int(curve.t[-1])
            for t, m, l_, h in zip(curve.t, curve.mean, curve.lower, curve.upper):
                curves.append((name, int(t), float(m), float(l_), float(h)))
        else:
            cum = group[0].cum_regret
            horizon = int(cum.size)
            mean = float(cum[-1]) if cum.size else 0.0
            lo = hi = math.nan
            for t, m in enumerate(cum, start=1):
                curves.append((name, t, float(m), math.nan, math.nan))
        summary.append((name, len(group), horizon, mean, lo, hi, truncated))
    return summary, curves


def _trace_rows(traces):
    for tr in traces:
        yield from tr.rows()


def write_outputs(traces: Sequence[RegretTrace], cfg: ExperimentConfig, out_dir) -> dict:
    """Write trace.csv, summary.csv and curves.csv; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / f"{k}.csv" for k in ("trace", "summary", "curves")}
    write_rows(paths["trace"], TRACE_COLUMNS, _trace_rows(traces))
    summary, curves = summarize(traces, [p.name for p in cfg.policies])
    write_rows(paths["summary"], SUMMARY_COLUMNS, summary)
    write_rows(paths["curves"], ("policy", "t", "mean", "lower", "upper"), curves)
    return paths
