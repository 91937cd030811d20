"""Auxiliary-variable posterior for the location of a stable law.

A variate Z ~ S_alpha(1, beta, 0) can be written Z = t(Y) W^((alpha-1)/alpha)
with Y uniform on (-1/2, 1/2), W ~ Exp(1), and

    t(y) = c * sin(pi alpha y + eta) / cos(pi y)
             * (cos(pi y) / cos(pi (alpha - 1) y + eta))^((alpha - 1) / alpha)

where eta = atan(beta tan(pi alpha / 2)) and c = (1 + (beta tan(pi alpha/2))^2)^(1/(2 alpha)).
The pair (Z, Y) has the joint density

    f(z, y) = k exp(-|z/t(y)|^k) |z/t(y)|^k / |z|,   k = alpha / (alpha - 1),

supported where z and t(y) share a sign.  t vanishes at y = l = -eta / (pi alpha)
and changes sign there, so an observation with z > 0 has its auxiliary
variable in (l, 1/2) and one with z < 0 in (-1/2, l).

Conditionals used by the Gibbs sampler:

* y | mu, x: density proportional to exp(-v) v with v = |z/t(y)|^k, drawn by
  inverse-CDF from a table shared by all observations (see :class:`AuxTable`);
* mu | y, x: the auxiliary-variable form, proportional to
  exp(-sum v_i) prod v_i / |x_i - mu| p(mu), restricted to locations that keep
  every z_i sign-compatible with its y_i; drawn by slice sampling.

Given y, the sign constraint pins mu between two adjacent order statistics
of the data, so these two moves alone never let mu leave its starting gap.
Each sweep therefore begins with a slice move on the y-integrated posterior
prod f_S((x_i - mu) / sigma) p(mu), whose stable log-density comes from the
same table.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .errors import DegenerateInputError, PoleError, ResampleY

log = logging.getLogger(__name__)

__all__ = [
    "AuxDensityParams",
    "PriorSpec",
    "GibbsState",
    "AuxTable",
    "aux_table",
    "t_fn",
    "joint_density",
    "conditional_y_logdensity",
    "sample_y",
    "sample_y_batch",
    "stable_logpdf",
    "sample_mu",
    "sample_mu_marginal",
    "gibbs_sweep",
    "posterior_draw",
    "run_chain",
]

_DIST_FLOOR = 1e-12
_Z_TOL = 1e-300


@dataclass(frozen=True)
class AuxDensityParams:
    """Shape of the auxiliary construction for a given (alpha, beta)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")

    @property
    def zeta(self) -> float:
        if self.beta == 0.0:
            return 0.0
        return self.beta * math.tan(math.pi * self.alpha / 2)

    @property
    def eta(self) -> float:
        return math.atan(self.zeta)

    @property
    def l(self) -> float:  # noqa: E743
        return -self.eta / (math.pi * self.alpha)

    @property
    def k(self) -> float:
        return self.alpha / (self.alpha - 1.0)

    @property
    def scale(self) -> float:
        return (1.0 + self.zeta ** 2) ** (1.0 / (2.0 * self.alpha))


def _t_raw(aux: AuxDensityParams, y):
    a, eta = aux.alpha, aux.eta
    cy = np.cos(np.pi * y)
    c3 = np.cos(np.pi * (a - 1.0) * y + eta)
    return aux.scale * np.sin(np.pi * a * y + eta) / cy * (cy / c3) ** ((a - 1.0) / a)


def t_fn(aux: AuxDensityParams, y):
    """Auxiliary transform t(y); raises :class:`PoleError` where it vanishes."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(np.abs(y_arr) >= 0.5):
        raise PoleError("y must lie strictly inside (-1/2, 1/2)")
    if np.any(np.abs(y_arr - aux.l) <= 1e-14):
        raise PoleError(f"t vanishes at y = l = {aux.l}")
    out = _t_raw(aux, y_arr)
    if np.any(out == 0) or not np.all(np.isfinite(out)):
        raise PoleError("t is zero or non-finite at the requested point")
    return float(out) if out.ndim == 0 else out


def joint_density(z, y, aux: AuxDensityParams):
    """Bivariate density of (Z, Y); zero outside the sign-compatible support."""
    z_arr, y_arr = np.broadcast_arrays(np.asarray(z, float), np.asarray(y, float))
    out = np.zeros(z_arr.shape)
    inside = (np.abs(y_arr) < 0.5) & (z_arr != 0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = _t_raw(aux, np.where(inside, y_arr, 0.0))
        ratio = z_arr / t
        ok = inside & (ratio > 0) & np.isfinite(ratio)
        v = np.where(ok, ratio, 1.0) ** aux.k
        dens = aux.k * np.exp(-v) * v / np.abs(np.where(ok, z_arr, 1.0))
    out[ok] = dens[ok]
    return float(out) if out.ndim == 0 else out


def conditional_y_logdensity(z: float, y, aux: AuxDensityParams):
    """Unnormalized log p(y | z): -v + 1 + log v on the compatible side, else -inf."""
    y_arr = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = _t_raw(aux, y_arr)
        ratio = z / t
        logv = aux.k * np.log(np.where(ratio > 0, ratio, np.nan))
        out = -np.exp(logv) + 1.0 + logv
    out = np.where(np.isfinite(out), out, -np.inf)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PriorSpec:
    """Prior on the location: flat on [low, high] or Gaussian(mean, std)."""

    kind: str = "flat"
    low: float = -1e6
    high: float = 1e6
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.kind == "flat":
            if not (math.isfinite(self.low) and math.isfinite(self.high) and self.low < self.high):
                raise ValueError("flat prior needs finite low < high")
        elif self.kind == "gaussian":
            if not (self.std > 0 and math.isfinite(self.mean) and math.isfinite(self.std)):
                raise ValueError("gaussian prior needs finite mean and std > 0")
        else:
            raise ValueError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def flat(cls, bound: float) -> "PriorSpec":
        return cls(kind="flat", low=-bound, high=bound)

    @classmethod
    def gaussian(cls, mean: float, std: float) -> "PriorSpec":
        return cls(kind="gaussian", mean=mean, std=std)

    @property
    def bounds(self) -> tuple[float, float]:
        if self.kind == "flat":
            return self.low, self.high
        return -math.inf, math.inf

    def logpdf(self, mu: float) -> float:
        if self.kind == "flat":
            return 0.0 if self.low <= mu <= self.high else -math.inf
        return -0.5 * ((mu - self.mean) / self.std) ** 2

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "flat":
            return float(rng.uniform(self.low, self.high))
        return float(rng.normal(self.mean, self.std))

    def clip(self, mu: float) -> float:
        lo, hi = self.bounds
        return float(min(max(mu, lo), hi))


class AuxTable:
    """Tabulated conditional of y given log|z| for one (alpha, beta).

    p(y | z) depends on z only through its sign and a = log|z|, so the
    inverse CDF is tabulated once on a grid of a values and shared by all
    observations.  On each side of l the auxiliary variable is mapped to
    xi with y = endpoint + width * expit(xi), which resolves both the zero
    of t at l and its blow-up at +-1/2.  Each row stores the quantile
    function of xi at logit-spaced probability levels, so a draw is O(1)
    index arithmetic; draws for an arbitrary a mix the two neighbouring
    rows linearly.  The row normalizers give the stable
    log-density of z for free.
    """

    A_MIN = -10.0
    A_MAX = 12.0
    DA = 0.05
    DA_LOGPDF = 0.01
    XI_STEP = 0.025
    TAU_MAX = 30.0
    DTAU = 0.05

    def __init__(self, aux: AuxDensityParams):
        self.aux = aux
        a = aux.alpha
        self.k = aux.k
        self.widths = (aux.l + 0.5, 0.5 - aux.l)  # left side, right side
        xi = np.arange(-45.0, 45.0 + self.XI_STEP / 2, self.XI_STEP)
        logt = np.stack([self._logabs_t(side, xi) for side in (0, 1)])
        keep = np.any((logt > self.A_MIN - 8) & (logt < self.A_MAX + 8), axis=0)
        idx = np.flatnonzero(keep)
        xi = xi[idx[0] : idx[-1] + 1]
        self.xi = xi
        self.logt = logt[:, idx[0] : idx[-1] + 1]
        self.logjac = np.stack(
            [math.log(w) + _log_expit(xi) + _log_expit(-xi) for w in self.widths]
        )
        self.a_grid = np.arange(self.A_MIN, self.A_MAX + self.DA / 2, self.DA)
        self.n_rows = self.a_grid.size
        self.tau = np.arange(-self.TAU_MAX, self.TAU_MAX + self.DTAU / 2, self.DTAU)
        self.n_levels = self.tau.size
        levels = expit(self.tau)
        quant = np.empty((2, self.n_rows, self.n_levels))
        for side in (0, 1):
            cdf, _ = self._row_cdf(side, self.a_grid)
            for r in range(self.n_rows):
                quant[side, r] = _inverse_cdf(cdf[r], xi, levels)
        self._quant = quant.ravel()
        fine = np.arange(self.A_MIN, self.A_MAX + self.DA_LOGPDF / 2, self.DA_LOGPDF)
        self.logpdf_grid = fine
        self._logpdf = np.stack(
            [math.log(self.k) - fine + self._log_norm(side, fine) for side in (0, 1)]
        ).ravel()
        self._logpdf_zero = 0.5 * (self._logpdf[0] + self._logpdf[fine.size])
        self.tail_slope = -(1.0 + a)

    def _logabs_t(self, side, xi):
        aux = self.aux
        a, eta, w = aux.alpha, aux.eta, self.widths[side]
        if side == 1:
            d = w * expit(xi)  # distance from l
            e = w * expit(-xi)  # distance from 1/2
            y = aux.l + d
        else:
            e = w * expit(xi)  # distance from -1/2
            d = w * expit(-xi)  # distance from l
            y = aux.l - d
        with np.errstate(divide="ignore"):
            return (
                math.log(aux.scale)
                + np.log(np.sin(np.pi * a * d))
                - np.log(np.sin(np.pi * e)) / a
                - (a - 1.0) / a * np.log(np.cos(np.pi * (a - 1.0) * y + eta))
            )

    def _logq(self, side, a_values):
        w = self.k * (np.asarray(a_values)[:, None] - self.logt[side][None, :])
        with np.errstate(over="ignore"):
            return w - np.exp(w) + self.logjac[side][None, :]

    def _row_cdf(self, side, a_values):
        logq = self._logq(side, a_values)
        peak = logq.max(axis=1, keepdims=True)
        q = np.exp(logq - peak)
        mass = 0.5 * (q[:, 1:] + q[:, :-1]) * self.XI_STEP
        total = mass.sum(axis=1, keepdims=True)
        cdf = np.concatenate([np.zeros((len(q), 1)), np.cumsum(mass, axis=1)], axis=1) / total
        cdf[:, -1] = 1.0
        return cdf, np.log(total[:, 0]) + peak[:, 0]

    def _log_norm(self, side, a_values, chunk=256):
        out = np.empty(len(a_values))
        for i in range(0, len(a_values), chunk):
            _, out[i : i + chunk] = self._row_cdf(side, a_values[i : i + chunk])
        return out

    def y_from_xi(self, side, xi):
        w = np.where(side == 1, self.widths[1], self.widths[0])
        base = np.where(side == 1, self.aux.l, -0.5)
        return base + w * expit(xi)

    def logabs_t_from_xi(self, side, xi):
        return np.where(side == 1, self._logabs_t(1, xi), self._logabs_t(0, xi))

    def sample(self, z, rng: np.random.Generator):
        """Draw y for each z; returns ``(y, log|t(y)|)``."""
        z = np.asarray(z, dtype=float)
        n = z.size
        side = (z > 0).astype(np.intp)
        zero = z == 0
        if np.any(zero):
            side[zero] = rng.integers(0, 2, size=int(zero.sum()))
        with np.errstate(divide="ignore"):
            a = np.log(np.abs(z))
        a = np.clip(a, self.A_MIN - 30.0, self.A_MAX + 30.0)
        a_in = np.clip(a, self.A_MIN, self.A_MAX)
        pos = (a_in - self.A_MIN) / self.DA
        row = np.minimum(pos.astype(np.intp), self.n_rows - 2)
        row = row + (rng.random(n) < (pos - row))
        with np.errstate(divide="ignore"):
            tau = np.log(rng.random(n))
        tau = tau - np.log1p(-np.exp(tau))
        tpos = (np.clip(tau, -self.TAU_MAX, self.TAU_MAX) + self.TAU_MAX) / self.DTAU
        lvl = np.minimum(tpos.astype(np.intp), self.n_levels - 2)
        base = (side * self.n_rows + row) * self.n_levels + lvl
        q0 = self._quant[base]
        xi = q0 + (tpos - lvl) * (self._quant[base + 1] - q0)
        # beyond the table: shift along the asymptotes of log|t| near l and +-1/2
        sgn = np.where(side == 1, 1.0, -1.0)
        low = a < self.A_MIN
        high = a > self.A_MAX
        xi = xi + sgn * np.where(low, a - self.A_MIN, 0.0)
        xi = xi + sgn * np.where(high, self.aux.alpha * (a - self.A_MAX), 0.0)
        y = self.y_from_xi(side, xi)
        logt = self.logabs_t_from_xi(side, xi)
        return y, logt

    def logpdf(self, z):
        """Log-density of S_alpha(1, beta, 0) at ``z``."""
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            a = np.log(np.abs(z))
        n = self.logpdf_grid.size
        pos = (np.clip(a, self.A_MIN, self.A_MAX) - self.A_MIN) / self.DA_LOGPDF
        i = np.minimum(pos.astype(np.intp), n - 2) + np.where(z > 0, n, 0)
        lo = self._logpdf[i]
        out = lo + (pos - (i % n)) * (self._logpdf[i + 1] - lo)
        out = out + self.tail_slope * np.maximum(a - self.A_MAX, 0.0)
        if np.any(z == 0):
            out = np.where(z == 0, self._logpdf_zero, out)
        return out


def _inverse_cdf(cdf, x, levels):
    # strictly increasing knots only; flat stretches carry no mass
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return np.interp(levels, cdf[keep], x[keep])


def _log_expit(x):
    return -np.logaddexp(0.0, -x)


@lru_cache(maxsize=8)
def _cached_table(alpha: float, beta: float) -> AuxTable:
    return AuxTable(AuxDensityParams(alpha, beta))


def aux_table(aux: AuxDensityParams) -> AuxTable:
    return _cached_table(float(aux.alpha), float(aux.beta))


def sample_y_batch(z, aux: AuxDensityParams, rng: np.random.Generator):
    """Vectorized y | z draws; returns ``(y, log|t(y)|)``."""
    return aux_table(aux).sample(z, rng)


def sample_y(z: float, aux: AuxDensityParams, rng: np.random.Generator) -> float:
    """One draw of the auxiliary variable for a single standardized residual."""
    if not abs(z) > _Z_TOL:
        raise DegenerateInputError(f"|z| = {abs(z)} is too small to place y")
    y, _ = aux_table(aux).sample(np.array([z]), rng)
    return float(y[0])


def stable_logpdf(z, aux: AuxDensityParams):
    """Tabulated log-density of S_alpha(1, beta, 0)."""
    return aux_table(aux).logpdf(z)


def _slice_1d(logp, x0, rng, width, lower=-math.inf, upper=math.inf, max_steps=60, lp0=None):
    """Univariate slice sampler (stepping out, then shrinkage)."""
    if lp0 is None:
        lp0 = logp(x0)
    level = lp0 + math.log(rng.random())
    if math.isfinite(lower) and math.isfinite(upper) and upper - lower <= width:
        left, right = lower, upper
    else:
        left = x0 - width * rng.random()
        right = left + width
        steps = max_steps
        while steps > 0 and left > lower and logp(left) > level:
            left -= width
            steps -= 1
        steps = max_steps
        while steps > 0 and right < upper and logp(right) > level:
            right += width
            steps -= 1
        left, right = max(left, lower), min(right, upper)
    for _ in range(200):
        x1 = left + (right - left) * rng.random()
        lp1 = logp(x1)
        if lp1 > level:
            return x1, lp1
        if x1 < x0:
            left = x1
        else:
            right = x1
    return x0, lp0


def _sign_interval(x, logt_sign_right):
    """Locations keeping every x_i on the side its auxiliary variable sits."""
    right = logt_sign_right
    lo = float(np.max(x[~right])) if np.any(~right) else -math.inf
    hi = float(np.min(x[right])) if np.any(right) else math.inf
    return lo, hi


def sample_mu(observations, y_vec, aux: AuxDensityParams, sigma: float, prior: PriorSpec,
              rng: np.random.Generator, *, mu_current=None, logt=None) -> float:
    """Slice draw of mu | y, x from the auxiliary-variable conditional.

    Raises :class:`ResampleY` when no location is compatible with the
    sides of ``y_vec``.
    """
    x = np.asarray(observations, dtype=float)
    y = np.asarray(y_vec, dtype=float)
    if x.shape != y.shape:
        raise ValueError("y_vec must match observations")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if logt is None:
        logt = np.log(np.abs(_t_raw(aux, y)))
    right = y > aux.l
    lo, hi = _sign_interval(x, right)
    p_lo, p_hi = prior.bounds
    lo, hi = max(lo, p_lo), min(hi, p_hi)
    if not lo < hi:
        raise ResampleY(f"sign-compatible interval ({lo}, {hi}) is empty")
    k = aux.k
    shift = math.log(sigma) + logt

    def logp(mu):
        if not lo < mu < hi:
            return -math.inf
        dist = np.maximum(np.abs(x - mu), _DIST_FLOOR)
        ld = np.log(dist)
        return float(np.sum((k - 1.0) * ld - np.exp(k * (ld - shift)))) + prior.logpdf(mu)

    if mu_current is None or not lo < mu_current < hi:
        if math.isfinite(lo) and math.isfinite(hi):
            mu_current = 0.5 * (lo + hi)
        else:
            edge = lo if math.isfinite(lo) else hi
            mu_current = edge + (sigma if math.isfinite(lo) else -sigma)
    width = (hi - lo) if math.isfinite(hi - lo) else sigma
    mu, _ = _slice_1d(logp, mu_current, rng, width, lower=lo, upper=hi)
    return float(mu)


def marginal_logpost(x, aux, sigma, prior):
    """log p(mu | x) up to a constant, with the auxiliary variables integrated out."""
    table = aux_table(aux)
    log_sigma = math.log(sigma)

    def logp(mu):
        lp = prior.logpdf(mu)
        if lp == -math.inf:
            return lp
        return float(np.sum(table.logpdf((x - mu) / sigma))) - x.size * log_sigma + lp

    return logp


def sample_mu_marginal(observations, aux: AuxDensityParams, sigma: float, prior: PriorSpec,
                       rng: np.random.Generator, mu_current: float, width=None) -> float:
    """Slice move on the y-integrated location posterior."""
    x = np.asarray(observations, dtype=float)
    logp = marginal_logpost(x, aux, sigma, prior)
    if width is None:
        width = 3.0 * sigma / math.sqrt(x.size)
    lo, hi = prior.bounds
    mu, _ = _slice_1d(logp, prior.clip(mu_current), rng, width, lower=lo, upper=hi)
    return float(mu)


@dataclass
class GibbsState:
    """Chain state for one arm; owned by a single caller."""

    mu_current: float
    rng: np.random.Generator
    y_current: np.ndarray = field(default_factory=lambda: np.empty(0))
    logt_current: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_count: int = 0
    n_obs: int = 0

    @classmethod
    def start(cls, history, prior: PriorSpec, rng: np.random.Generator) -> "GibbsState":
        x = np.asarray(history, dtype=float)
        mu0 = prior.clip(float(np.median(x))) if x.size else prior.draw(rng)
        return cls(mu_current=mu0, rng=rng)


def gibbs_sweep(x, aux: AuxDensityParams, sigma: float, prior: PriorSpec, state: GibbsState):
    """One sweep: marginal location move, y | mu, then mu | y."""
    rng = state.rng
    mu = sample_mu_marginal(x, aux, sigma, prior, rng, state.mu_current)
    z = (x - mu) / sigma
    y, logt = sample_y_batch(z, aux, rng)
    for attempt in range(3):
        try:
            mu = sample_mu(x, y, aux, sigma, prior, rng, mu_current=mu, logt=logt)
            break
        except ResampleY:
            y, logt = sample_y_batch((x - mu) / sigma, aux, rng)
    state.mu_current = mu
    state.y_current = y
    state.logt_current = logt
    state.n_obs = x.size
    state.step_count += 1
    return mu


def posterior_draw(history, params_known, prior: PriorSpec, budget: int, state: GibbsState) -> float:
    """Advance the chain ``budget`` sweeps on ``history`` and return the last mu.

    ``params_known`` is ``(alpha, beta, sigma)``.
    """
    x = np.asarray(history, dtype=float)
    if x.size == 0:
        raise DegenerateInputError("history must be nonempty")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    alpha, beta, sigma = params_known
    aux = AuxDensityParams(alpha, beta)
    failures = 0
    for _ in range(budget):
        try:
            gibbs_sweep(x, aux, sigma, prior, state)
        except (ResampleY, FloatingPointError) as exc:  # pragma: no cover - defensive
            failures += 1
            log.warning("gibbs sweep failed (%s); falling back to prior draw", exc)
            if failures >= 3:
                state.mu_current = prior.draw(state.rng)
                break
    return state.mu_current


def run_chain(history, params_known, prior: PriorSpec, n_sweeps: int, rng: np.random.Generator,
              burn_in: int = 0) -> np.ndarray:
    """Fresh chain; returns the post-burn-in mu trace."""
    state = GibbsState.start(history, prior, rng)
    x = np.asarray(history, dtype=float)
    alpha, beta, sigma = params_known
    aux = AuxDensityParams(alpha, beta)
    out = np.empty(n_sweeps)
    for i in range(n_sweeps):
        out[i] = gibbs_sweep(x, aux, sigma, prior, state)
    return out[burn_in:]
