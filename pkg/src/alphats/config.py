"""Experiment configuration and dataset manifests (YAML, strict keys).

Unknown keys and wrong types are rejected with the dotted path of the
offending field, e.g. ``policies[2].mcmc_budget``.  Relative dataset
paths are resolved against the directory of the file they appear in.

Experiment schema::

    horizon: 2000            # rounds per run, >= 1
    seeds: [0, 1, 2]         # or an integer n meaning 0..n-1
    master_seed: 0
    out_dir: out/bench       # overridden by --out
    allow_gaussian: false    # permit alpha = 2 in synthetic environments
    environment:
      kind: synthetic        # or replay
      n_arms: 30
      alpha: 1.3
      beta: -0.5
      sigma: 500.0
      location_range: [0.0, 3000.0]
      spacing: random        # or equal
    policies:
      - kind: ts_asym        # ts_asym ts_sym greedy ucb robust_ucb random oracle
        name: asym           # optional display name, unique
        mcmc_budget: 5
        refresh_every: 50
        posterior_mode: raw  # or symmetrized
        clip_bound: 1.0e6
        epsilon_explore: 0.1
        epsilon_moment: null
        concentration: 1.0
        prior: {kind: flat, low: -1.0e6, high: 1.0e6}

A replay environment reads a matrix instead::

    environment:
      kind: replay
      dataset: latency.manifest.yaml   # manifest or plain CSV
      columns: [0, 1, 2]               # null means every column
      reward_sign: -1
      header: false
      delimiter: ","
      params: null                     # or {alpha, beta, sigma}; null fits the data
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError, DataError
from .io import sha256_file
from .policies import POLICY_KINDS, PolicyConfig
from .posterior import PriorSpec

__all__ = [
    "SyntheticEnvConfig",
    "ReplayEnvConfig",
    "ExperimentConfig",
    "DatasetManifest",
    "DATASET_KINDS",
    "load_config",
    "parse_config",
    "dump_config",
    "load_manifest",
    "save_manifest",
]

DATASET_KINDS = ("price-series", "latency-matrix", "generic-matrix")


class _Loader(yaml.SafeLoader):
    """SafeLoader that also reads ``1e5`` and ``1.0e4`` as floats."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+][0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)


def _yaml_load(text: str):
    return yaml.load(text, Loader=_Loader)


def _check_keys(data, path: str, required: tuple, optional: tuple) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<root>'}: expected a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"{_join(path, unknown[0])}: unknown key")
    for key in required:
        if key not in data:
            raise ConfigError(f"{_join(path, key)}: required key missing")
    return data


def _join(path: str, key) -> str:
    return f"{path}.{key}" if path else str(key)


def _num(value, path: str, *, integer=False, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return value


def _str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    return value


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true/false, got {value!r}")
    return value


@dataclass(frozen=True)
class SyntheticEnvConfig:
    n_arms: int
    alpha: float
    beta: float
    sigma: float
    location_range: tuple[float, float]
    spacing: str = "random"
    kind: str = "synthetic"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_arms": self.n_arms,
            "alpha": self.alpha,
            "beta": self.beta,
            "sigma": self.sigma,
            "location_range": list(self.location_range),
            "spacing": self.spacing,
        }


@dataclass(frozen=True)
class ReplayEnvConfig:
    dataset: str
    columns: Optional[tuple[int, ...]] = None
    reward_sign: int = 1
    header: bool = False
    delimiter: str = ","
    params: Optional[tuple[float, float, float]] = None
    kind: str = "replay"

    def to_dict(self) -> dict:
        params = None
        if self.params is not None:
            params = dict(zip(("alpha", "beta", "sigma"), self.params))
        return {
            "kind": self.kind,
            "dataset": self.dataset,
            "columns": None if self.columns is None else list(self.columns),
            "reward_sign": self.reward_sign,
            "header": self.header,
            "delimiter": self.delimiter,
            "params": params,
        }


def _parse_env(data, path: str, allow_gaussian: bool, base_dir: Path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    kind = _str(data.get("kind", "synthetic"), _join(path, "kind"))
    if kind == "synthetic":
        _check_keys(data, path, ("n_arms", "alpha", "beta", "sigma", "location_range"),
                    ("kind", "spacing"))
        n_arms = _num(data["n_arms"], _join(path, "n_arms"), integer=True)
        if n_arms < 1:
            raise ConfigError(f"{_join(path, 'n_arms')}: must be >= 1")
        alpha = _num(data["alpha"], _join(path, "alpha"))
        if not 1.0 < alpha <= 2.0:
            raise ConfigError(f"{_join(path, 'alpha')}: must lie in (1, 2]")
        if alpha == 2.0 and not allow_gaussian:
            raise ConfigError(f"{_join(path, 'alpha')}: alpha = 2 needs allow_gaussian: true")
        beta = _num(data["beta"], _join(path, "beta"))
        if not -1.0 <= beta <= 1.0:
            raise ConfigError(f"{_join(path, 'beta')}: must lie in [-1, 1]")
        sigma = _num(data["sigma"], _join(path, "sigma"))
        if not sigma > 0:
            raise ConfigError(f"{_join(path, 'sigma')}: must be positive")
        rng_path = _join(path, "location_range")
        lr = data["location_range"]
        if not isinstance(lr, (list, tuple)) or len(lr) != 2:
            raise ConfigError(f"{rng_path}: expected [low, high]")
        lo, hi = _num(lr[0], f"{rng_path}[0]"), _num(lr[1], f"{rng_path}[1]")
        if hi < lo or (hi == lo and n_arms > 1):
            raise ConfigError(f"{rng_path}: empty range")
        spacing = _str(data.get("spacing", "random"), _join(path, "spacing"))
        if spacing not in ("random", "equal"):
            raise ConfigError(f"{_join(path, 'spacing')}: must be 'random' or 'equal'")
        return SyntheticEnvConfig(n_arms, alpha, beta, sigma, (lo, hi), spacing)
    if kind == "replay":
        _check_keys(data, path, ("dataset",),
                    ("kind", "columns", "reward_sign", "header", "delimiter", "params"))
        dataset = _str(data["dataset"], _join(path, "dataset"))
        if not (base_dir / dataset).is_file():
            raise ConfigError(f"{_join(path, 'dataset')}: file not found: {base_dir / dataset}")
        columns = data.get("columns")
        if columns is not None:
            if not isinstance(columns, list) or not columns:
                raise ConfigError(f"{_join(path, 'columns')}: expected a nonempty list or null")
            columns = tuple(
                _num(c, f"{_join(path, 'columns')}[{i}]", integer=True)
                for i, c in enumerate(columns)
            )
            if min(columns) < 0:
                raise ConfigError(f"{_join(path, 'columns')}: indices must be >= 0")
        sign = _num(data.get("reward_sign", 1), _join(path, "reward_sign"), integer=True)
        if sign not in (1, -1):
            raise ConfigError(f"{_join(path, 'reward_sign')}: must be 1 or -1")
        header = _bool(data.get("header", False), _join(path, "header"))
        delim = _str(data.get("delimiter", ","), _join(path, "delimiter"))
        if len(delim) != 1:
            raise ConfigError(f"{_join(path, 'delimiter')}: must be one character")
        params = data.get("params")
        if params is not None:
            ppath = _join(path, "params")
            _check_keys(params, ppath, ("alpha", "beta", "sigma"), ())
            params = tuple(_num(params[k], _join(ppath, k)) for k in ("alpha", "beta", "sigma"))
            if not 1.0 < params[0] <= 2.0 or not -1 <= params[1] <= 1 or not params[2] > 0:
                raise ConfigError(f"{ppath}: need alpha in (1, 2], |beta| <= 1, sigma > 0")
        return ReplayEnvConfig(dataset, columns, sign, header, delim, params)
    raise ConfigError(f"{_join(path, 'kind')}: must be 'synthetic' or 'replay'")


_POLICY_KEYS = ("name", "epsilon_explore", "clip_bound", "epsilon_moment", "concentration",
                "mcmc_budget", "refresh_every", "prior", "posterior_mode")


def _parse_prior(data, path: str) -> PriorSpec:
    kind = _str(data.get("kind", "flat") if isinstance(data, dict) else None, _join(path, "kind"))
    if kind == "flat":
        _check_keys(data, path, ("low", "high"), ("kind",))
        low, high = _num(data["low"], _join(path, "low")), _num(data["high"], _join(path, "high"))
        if not low < high:
            raise ConfigError(f"{path}: need low < high")
        return PriorSpec(kind="flat", low=low, high=high)
    if kind == "gaussian":
        _check_keys(data, path, ("mean", "std"), ("kind",))
        mean, std = _num(data["mean"], _join(path, "mean")), _num(data["std"], _join(path, "std"))
        if not std > 0:
            raise ConfigError(f"{_join(path, 'std')}: must be positive")
        return PriorSpec.gaussian(mean, std)
    raise ConfigError(f"{_join(path, 'kind')}: must be 'flat' or 'gaussian'")


def _prior_dict(prior: PriorSpec) -> dict:
    if prior.kind == "flat":
        return {"kind": "flat", "low": prior.low, "high": prior.high}
    return {"kind": "gaussian", "mean": prior.mean, "std": prior.std}


def _parse_policy(data, path: str) -> PolicyConfig:
    _check_keys(data, path, ("kind",), _POLICY_KEYS)
    kind = _str(data["kind"], _join(path, "kind"))
    if kind not in POLICY_KINDS:
        raise ConfigError(f"{_join(path, 'kind')}: unknown policy {kind!r}")
    kwargs: dict[str, Any] = {"kind": kind}
    if "name" in data:
        kwargs["name"] = _str(data["name"], _join(path, "name"))
    for key in ("epsilon_explore", "clip_bound", "concentration"):
        if key in data:
            kwargs[key] = _num(data[key], _join(path, key))
    if "epsilon_moment" in data:
        kwargs["epsilon_moment"] = _num(data["epsilon_moment"], _join(path, "epsilon_moment"),
                                        allow_none=True)
    for key in ("mcmc_budget", "refresh_every"):
        if key in data:
            kwargs[key] = _num(data[key], _join(path, key), integer=True)
    if "posterior_mode" in data:
        kwargs["posterior_mode"] = _str(data["posterior_mode"], _join(path, "posterior_mode"))
    if data.get("prior") is not None:
        kwargs["prior"] = _parse_prior(data["prior"], _join(path, "prior"))
    try:
        return PolicyConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _policy_dict(cfg: PolicyConfig) -> dict:
    return {
        "kind": cfg.kind,
        "name": cfg.name,
        "epsilon_explore": cfg.epsilon_explore,
        "clip_bound": cfg.clip_bound,
        "epsilon_moment": cfg.epsilon_moment,
        "concentration": cfg.concentration,
        "mcmc_budget": cfg.mcmc_budget,
        "refresh_every": cfg.refresh_every,
        "prior": None if cfg.prior is None else _prior_dict(cfg.prior),
        "posterior_mode": cfg.posterior_mode,
    }


@dataclass(frozen=True)
class ExperimentConfig:
    environment: Any
    horizon: int
    seeds: tuple[int, ...]
    policies: tuple[PolicyConfig, ...]
    out_dir: str = "out"
    master_seed: int = 0
    allow_gaussian: bool = False
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    @property
    def is_replay(self) -> bool:
        return isinstance(self.environment, ReplayEnvConfig)

    def dataset_path(self) -> Path:
        return self.base_dir / self.environment.dataset

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "master_seed": self.master_seed,
            "out_dir": self.out_dir,
            "allow_gaussian": self.allow_gaussian,
            "environment": self.environment.to_dict(),
            "policies": [_policy_dict(p) for p in self.policies],
        }


def parse_config(data, base_dir=".") -> ExperimentConfig:
    base_dir = Path(base_dir)
    _check_keys(data, "", ("environment", "horizon", "seeds", "policies"),
                ("out_dir", "master_seed", "allow_gaussian"))
    horizon = _num(data["horizon"], "horizon", integer=True)
    if horizon < 1:
        raise ConfigError("horizon: must be >= 1")
    seeds = data["seeds"]
    if isinstance(seeds, int) and not isinstance(seeds, bool):
        if seeds < 1:
            raise ConfigError("seeds: need at least one seed")
        seeds = tuple(range(seeds))
    elif isinstance(seeds, list):
        seeds = tuple(_num(s, f"seeds[{i}]", integer=True) for i, s in enumerate(seeds))
        if not seeds:
            raise ConfigError("seeds: need at least one seed")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds: duplicate seed")
    else:
        raise ConfigError("seeds: expected a list of integers or a count")
    if any(s < 0 for s in seeds):
        raise ConfigError("seeds: must be >= 0")
    master = _num(data.get("master_seed", 0), "master_seed", integer=True)
    if master < 0:
        raise ConfigError("master_seed: must be >= 0")
    allow_gaussian = _bool(data.get("allow_gaussian", False), "allow_gaussian")
    env = _parse_env(data["environment"], "environment", allow_gaussian, base_dir)
    pols = data["policies"]
    if not isinstance(pols, list) or not pols:
        raise ConfigError("policies: need at least one policy")
    policies = tuple(_parse_policy(p, f"policies[{i}]") for i, p in enumerate(pols))
    names = [p.name for p in policies]
    dup = next((n for n in names if names.count(n) > 1), None)
    if dup is not None:
        raise ConfigError(f"policies: duplicate policy name {dup!r}; set distinct names")
    out_dir = _str(data.get("out_dir", "out"), "out_dir")
    return ExperimentConfig(env, horizon, seeds, policies, out_dir, master, allow_gaussian,
                            base_dir)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = _yaml_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from None
    return parse_config(data, base_dir=path.parent)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


@dataclass(frozen=True)
class DatasetManifest:
    """Normalized matrix file plus what is needed to trust it later."""

    path: str
    kind: str
    rows: int
    columns: int
    checksum: str
    delimiter: str = ","
    header: bool = False
    source: str = ""
    source_checksum: str = ""

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ConfigError(f"kind: must be one of {DATASET_KINDS}")

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "kind": self.kind,
            "rows": self.rows,
            "columns": self.columns,
            "checksum": self.checksum,
            "delimiter": self.delimiter,
            "header": self.header,
            "source": self.source,
            "source_checksum": self.source_checksum,
        }


def save_manifest(manifest: DatasetManifest, path) -> None:
    Path(path).write_text(yaml.safe_dump(manifest.to_dict(), sort_keys=False), encoding="utf-8")


def load_manifest(path, verify: bool = True) -> tuple[DatasetManifest, Path]:
    """Read a manifest and return it with the resolved matrix path.

    The matrix file's checksum is compared with the recorded one unless
    ``verify`` is false.
    """
    path = Path(path)
    try:
        data = _yaml_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"{path}: cannot read manifest: {exc}") from None
    _check_keys(data, "", ("path", "kind", "rows", "columns", "checksum"),
                ("delimiter", "header", "source", "source_checksum"))
    manifest = DatasetManifest(
        path=_str(data["path"], "path"),
        kind=_str(data["kind"], "kind"),
        rows=_num(data["rows"], "rows", integer=True),
        columns=_num(data["columns"], "columns", integer=True),
        checksum=_str(data["checksum"], "checksum"),
        delimiter=_str(data.get("delimiter", ","), "delimiter"),
        header=_bool(data.get("header", False), "header"),
        source=_str(data.get("source", ""), "source"),
        source_checksum=_str(data.get("source_checksum", ""), "source_checksum"),
    )
    matrix_path = path.parent / manifest.path
    if verify:
        if not matrix_path.is_file():
            raise DataError(f"{path}: matrix file {matrix_path} is missing")
        actual = sha256_file(matrix_path)
        if actual != manifest.checksum:
            raise DataError(f"{matrix_path}: checksum mismatch (manifest {manifest.checksum[:12]}, "
                            f"file {actual[:12]})")
    return manifest, matrix_path
