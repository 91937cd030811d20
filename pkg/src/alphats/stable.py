"""Alpha-stable laws in the S1 parameterization.

The characteristic function used throughout is

    phi(u) = exp(-sigma^alpha |u|^alpha (1 - i beta sign(u) tan(pi alpha / 2)) + i u mu)

and only 1 < alpha <= 2 is supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError

__all__ = [
    "StableParams",
    "SymmetrizedTriple",
    "Symmetrizer",
    "char_fn",
    "sample",
    "combine",
    "symmetrize",
    "symmetrized_values",
    "location_from_symmetrized",
    "symmetrize_weights",
]


@dataclass(frozen=True)
class StableParams:
    """Parameters of S_alpha(sigma, beta, mu)."""

    alpha: float
    beta: float
    sigma: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "sigma", "mu"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def replace(self, **changes) -> "StableParams":
        fields = dict(alpha=self.alpha, beta=self.beta, sigma=self.sigma, mu=self.mu)
        fields.update(changes)
        return StableParams(**fields)


def char_fn(params: StableParams, u):
    """Characteristic function at ``u`` (scalar or array)."""
    u = np.asarray(u, dtype=float)
    a, b, s, m = params.alpha, params.beta, params.sigma, params.mu
    log_phi = (
        -(s ** a) * np.abs(u) ** a * (1.0 - 1j * b * np.sign(u) * math.tan(math.pi * a / 2))
        + 1j * u * m
    )
    out = np.exp(log_phi)
    return complex(out) if out.ndim == 0 else out


def sample(params: StableParams, count: int, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck draws from S_alpha(sigma, beta, mu)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    a, b = params.alpha, params.beta
    v = rng.uniform(-math.pi / 2, math.pi / 2, size=count)
    w = rng.exponential(1.0, size=count)
    zeta = b * math.tan(math.pi * a / 2)
    shift = math.atan(zeta) / a
    scale = (1.0 + zeta * zeta) ** (1.0 / (2.0 * a))
    av = a * (v + shift)
    x = (
        scale
        * np.sin(av)
        / np.cos(v) ** (1.0 / a)
        * (np.cos(v - av) / w) ** ((1.0 - a) / a)
    )
    return params.sigma * x + params.mu


def combine(params: StableParams, weights: Sequence[float]) -> StableParams:
    """Law of sum_n w_n X_n for i.i.d. X_n ~ ``params``."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise DegenerateInputError("weights must be nonempty")
    a = params.alpha
    mag = np.abs(w) ** a
    total = mag.sum()
    if total == 0:
        raise DegenerateInputError("all weights are zero")
    signed = (np.sign(w) * mag).sum()
    beta = signed / total * params.beta
    # exact cancellation can leave a rounding residue
    if abs(beta) < 1e-15:
        beta = 0.0
    return StableParams(
        alpha=a,
        beta=float(np.clip(beta, -1.0, 1.0)),
        sigma=float(total ** (1.0 / a) * params.sigma),
        mu=float(w.sum() * params.mu),
    )


def symmetrize_weights(alpha: float) -> tuple[float, float, float]:
    """Weights applied to (x1, x2, x3) of one triple."""
    return (-(2.0 ** (1.0 / alpha)), 1.0, 1.0)


@dataclass(frozen=True)
class SymmetrizedTriple:
    value: float
    source_indices: tuple[int, int, int]


def symmetrized_values(history, alpha: float) -> np.ndarray:
    """Vectorized x3 + x2 - 2^(1/alpha) x1 over disjoint consecutive triples."""
    x = np.asarray(history, dtype=float)
    m = x.size // 3
    trip = x[: 3 * m].reshape(m, 3)
    return trip[:, 2] + trip[:, 1] - 2.0 ** (1.0 / alpha) * trip[:, 0]


def symmetrize(history, alpha: float, offset: int = 0) -> list[SymmetrizedTriple]:
    """Skew-free pseudo-observations from disjoint triples of ``history``.

    The first element of each triple is the one scaled by 2^(1/alpha).
    Up to two trailing samples are left unused; :class:`Symmetrizer`
    carries them into the next call.
    """
    values = symmetrized_values(history, alpha)
    return [
        SymmetrizedTriple(float(v), (offset + 3 * k, offset + 3 * k + 1, offset + 3 * k + 2))
        for k, v in enumerate(values)
    ]


class Symmetrizer:
    """Streaming symmetrization with a carry buffer for incomplete triples."""

    def __init__(self, alpha: float):
        self.alpha = alpha
        self.carry: list[float] = []
        self.consumed = 0
        self.values: list[float] = []

    def feed(self, rewards) -> list[SymmetrizedTriple]:
        pending = self.carry + [float(r) for r in np.atleast_1d(rewards)]
        full = len(pending) - len(pending) % 3
        out = symmetrize(pending[:full], self.alpha, offset=self.consumed)
        self.consumed += full
        self.carry = pending[full:]
        self.values.extend(t.value for t in out)
        return out


def location_from_symmetrized(mean_xd: float, alpha: float) -> float:
    """Location estimate from the mean of symmetrized values."""
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    return mean_xd / (2.0 - 2.0 ** (1.0 / alpha))
