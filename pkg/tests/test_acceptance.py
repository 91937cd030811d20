"""End-to-end acceptance checks, each at its stated tolerance.

Every test appends one PASS/FAIL line that is echoed in the terminal
summary (``pytest tests/test_acceptance.py``).  Assertions come after
the report line so a failure still prints its measured numbers.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from alphats import (AuxDensityParams, PriorSpec, StableParams, char_fn, ecf, estimate_all,
                     joint_density, location_from_symmetrized, run_chain, sample,
                     symmetrized_values)
from alphats.cli import main
from alphats.config import load_config
from alphats.harness import run_experiment, worker_count, write_outputs
from alphats.io import read_trace, write_matrix
from conftest import pdf_oracle, report

ROOT = Path(__file__).resolve().parents[1]
GRID9 = [(a, b) for a in (1.2, 1.5, 1.8) for b in (-0.8, 0.0, 0.5)]

pytestmark = pytest.mark.slow


def test_sampler_cf():
    start = time.perf_counter()
    u = np.concatenate([-np.arange(1, 11) / 10, np.arange(1, 11) / 10])
    worst = 0.0
    for i, (a, b) in enumerate(GRID9):
        p = StableParams(a, b)
        x = sample(p, 100_000, np.random.default_rng([7, i]))
        worst = max(worst, max(abs(ecf(x, v) - char_fn(p, v)) for v in u))
    elapsed = time.perf_counter() - start
    ok = worst <= 0.02 and elapsed < 30
    report("sampler CF match", ok, f"sup |ECF - CF| = {worst:.4f} (<= 0.02), {elapsed:.1f} s")
    assert ok


def test_symmetrization():
    start = time.perf_counter()
    alpha = 1.3
    x = sample(StableParams(alpha, -0.8, 1.0, 5.0), 300_000, np.random.default_rng(11))
    xd = symmetrized_values(x, alpha)
    beta_hat = estimate_all(xd).params.beta
    loc = location_from_symmetrized(xd.mean(), alpha)
    se = xd.std(ddof=1) / math.sqrt(xd.size) / (2 - 2 ** (1 / alpha))
    elapsed = time.perf_counter() - start
    ok = xd.size == 100_000 and abs(beta_hat) <= 0.05 and abs(loc - 5) <= 3 * se and elapsed < 60
    report("skew removal", ok,
           f"beta_hat = {beta_hat:+.4f}, location = {loc:.3f} (5 +/- {3 * se:.3f}), {elapsed:.1f} s")
    assert ok


def test_ecf_recovery():
    start = time.perf_counter()
    worst = {"alpha": 0.0, "beta": 0.0, "sigma": 0.0}
    sigma = 2.0
    for i, (a, b) in enumerate(GRID9):
        fits = [estimate_all(sample(StableParams(a, b, sigma, 1.0), 10_000,
                                    np.random.default_rng([i, s]))).params for s in range(20)]
        worst["alpha"] = max(worst["alpha"], abs(np.median([f.alpha for f in fits]) - a))
        worst["beta"] = max(worst["beta"], abs(np.median([f.beta for f in fits]) - b))
        worst["sigma"] = max(worst["sigma"], abs(np.median([f.sigma for f in fits]) / sigma - 1))
    elapsed = time.perf_counter() - start
    ok = (worst["alpha"] <= 0.07 and worst["beta"] <= 0.1 and worst["sigma"] <= 0.1
          and elapsed < 120)
    report("ECF recovery", ok,
           f"worst median errors alpha {worst['alpha']:.3f}, beta {worst['beta']:.3f}, "
           f"sigma ratio {worst['sigma']:.3f}, {elapsed:.1f} s")
    assert ok


def _mass(aux):
    def inner(y):
        sign = 1.0 if y > aux.l else -1.0
        f = lambda s: joint_density(sign * math.exp(s), y, aux) * math.exp(s)  # noqa: E731
        return integrate.quad(f, -60, 60, limit=200, epsabs=1e-12)[0]

    return (integrate.quad(inner, -0.5, aux.l, limit=200, epsabs=1e-10)[0]
            + integrate.quad(inner, aux.l, 0.5, limit=200, epsabs=1e-10)[0])


def _marginal(z, aux):
    lo, hi = (aux.l, 0.5) if z > 0 else (-0.5, aux.l)
    return integrate.quad(lambda y: joint_density(z, y, aux), lo, hi, limit=400,
                          epsabs=1e-12, epsrel=1e-10)[0]


def test_density_oracle():
    start = time.perf_counter()
    mass_err, sup_err = 0.0, 0.0
    zs = np.linspace(-5, 5, 41)
    zs = zs[zs != 0]
    for a, b in ((1.5, 0.0), (1.5, -0.5), (1.8, 0.3)):
        aux = AuxDensityParams(a, b)
        mass_err = max(mass_err, abs(_mass(aux) - 1))
        sup_err = max(sup_err, max(abs(_marginal(z, aux) - pdf_oracle(z, a, b)) for z in zs))
    elapsed = time.perf_counter() - start
    ok = mass_err <= 1e-3 and sup_err <= 1e-3 and elapsed < 120
    report("auxiliary density", ok,
           f"|mass - 1| = {mass_err:.2e}, marginal sup error = {sup_err:.2e}, {elapsed:.1f} s")
    assert ok


def test_posterior_coverage():
    start = time.perf_counter()
    counts = {}
    for a, b in ((1.5, 0.0), (1.5, -0.5)):
        hits = 0
        for r in range(50):
            x = sample(StableParams(a, b, 1.0, 0.0), 500, np.random.default_rng([int(10 * a), r]))
            chain = run_chain(x, (a, b, 1.0), PriorSpec.flat(100), 2000,
                              np.random.default_rng([99, r]), burn_in=500)
            lo, hi = np.percentile(chain, [5, 95])
            hits += lo <= 0.0 <= hi
        counts[(a, b)] = hits
    elapsed = time.perf_counter() - start
    ok = all(h >= 43 for h in counts.values()) and elapsed < 600
    detail = ", ".join(f"{k}: {v}/50" for k, v in counts.items())
    report("posterior coverage", ok, f"90% intervals covering: {detail}, {elapsed:.1f} s")
    assert ok


@pytest.fixture(scope="module")
def benchmark(tmp_path_factory):
    cfg = load_config(ROOT / "configs" / "synthetic_skewed.yaml")
    start = time.perf_counter()
    traces = run_experiment(cfg, workers=worker_count())
    elapsed = time.perf_counter() - start
    out = tmp_path_factory.mktemp("bench")
    write_outputs(traces, cfg, out)
    return cfg, traces, elapsed, out


def _final(traces, name):
    final = np.array([tr.cum_regret[-1] for tr in traces if tr.policy == name])
    half = 1.96 * final.std(ddof=1) / math.sqrt(final.size)
    return final.mean(), final.mean() - half, final.mean() + half


def test_benchmark_ordering(benchmark):
    _, traces, elapsed, _ = benchmark
    asym, sym, greedy = (_final(traces, n) for n in ("ts_asym", "ts_sym", "greedy"))
    below_sym = asym[0] < sym[0]
    separated = asym[2] < greedy[1]
    ok = below_sym and separated and elapsed < 600
    fmt = lambda r: f"{r[0]:.0f} [{r[1]:.0f}, {r[2]:.0f}]"  # noqa: E731
    report("benchmark ordering", ok,
           f"asym {fmt(asym)}, sym {fmt(sym)}, greedy {fmt(greedy)}; asym < sym: {below_sym}, "
           f"asym CI below greedy CI: {separated}; {elapsed:.0f} s")
    assert ok


def test_benchmark_sublinear(benchmark):
    _, traces, _, _ = benchmark
    cum = np.mean([tr.cum_regret for tr in traces if tr.policy == "ts_asym"], axis=0)
    t = np.arange(1, cum.size + 1)
    window = (t >= 200) & (t <= 2000)
    slope = np.polyfit(np.log(t[window]), np.log(cum[window]), 1)[0]
    ok = slope < 1.0
    report("sublinear regret", ok, f"log-log slope over t in [200, 2000] = {slope:.3f} (< 1)")
    assert ok


REFERENCE_ROWS = {
    "financial": (["data/stocks_prices.csv", "--header", "--column", "0", "--log-returns"],
                  (7.71e-5, 1.38, -0.21, 0.0011)),
    "wireless": (["data/wireless_series.csv"], (1.71e-5, 1.72, -0.32, 0.0011)),
}


@pytest.mark.parametrize("name", sorted(REFERENCE_ROWS))
def test_reference_fits(name, tmp_path):
    args, (theta, alpha, beta, sigma) = REFERENCE_ROWS[name]
    out = tmp_path / "row.csv"
    start = time.perf_counter()
    code = main(["estimate", str(ROOT / args[0]), *args[1:], "--out", str(out)])
    elapsed = time.perf_counter() - start
    f = out.read_text().splitlines()[1].split(",")
    th, a, b, s = (float(v) for v in f[2:6])
    checks = {
        "alpha": abs(a - alpha) <= 0.1,
        "beta": abs(b - beta) <= 0.15,
        "sigma": 0.5 <= s / sigma <= 2,
        "theta": abs(math.log10(abs(th) / theta)) <= 1 if th != 0 else False,
    }
    ok = code == 0 and all(checks.values()) and elapsed < 30
    failed = [k for k, v in checks.items() if not v]
    report(f"reference fit ({name})", ok,
           f"theta {th:.3g} alpha {a:.3f} beta {b:.3f} sigma {s:.3g} vs "
           f"({theta:g}, {alpha}, {beta}, {sigma}); off: {failed or 'none'}")
    assert ok


def test_reproducibility(benchmark, tmp_path):
    cfg_path = ROOT / "configs" / "synthetic_skewed.yaml"
    outs = []
    for d in ("a", "b"):
        assert main(["run", "--config", str(cfg_path), "--seed", "3", "--out",
                     str(tmp_path / d)]) == 0
        outs.append(tmp_path / d)
    same = all((outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
               for f in ("trace.csv", "summary.csv", "curves.csv"))
    # the single-seed rerun must also equal that seed's slice of the full benchmark
    full = [r for r in read_trace(benchmark[3] / "trace.csv") if r["seed"] == 3]
    matches_full = read_trace(outs[0] / "trace.csv") == full
    ok = same and matches_full
    report("reproducibility", ok,
           f"rerun byte-identical: {same}, equals seed-3 rows of the full run: {matches_full}")
    assert ok


@pytest.mark.parametrize("config", ["stocks_replay.yaml", "latency_replay.yaml"])
def test_replay_emission(config, tmp_path):
    start = time.perf_counter()
    code = main(["replay", "--config", str(ROOT / "configs" / config), "--out", str(tmp_path)])
    verified = main(["verify", str(tmp_path / "trace.csv")]) == 0 if code == 0 else False
    cfg = load_config(ROOT / "configs" / config)
    rows = read_trace(tmp_path / "trace.csv") if code == 0 else []
    expected = len(cfg.policies) * len(cfg.seeds) * cfg.horizon
    ok = code == 0 and verified and len(rows) == expected
    report(f"replay emission ({config})", ok,
           f"exit {code}, {len(rows)} of {expected} rows, verify ok: {verified}, "
           f"{time.perf_counter() - start:.0f} s")
    assert ok


def test_replay_null(tmp_path):
    col = sample(StableParams(1.6, -0.3, 1.0, 10.0), 500, np.random.default_rng(5))
    write_matrix(tmp_path / "same.csv", np.tile(col[:, None], (1, 5)))
    (tmp_path / "null.yaml").write_text(
        "horizon: 500\nseeds: 10\nenvironment: {kind: replay, dataset: same.csv}\n"
        "policies:\n  - {kind: ts_asym, mcmc_budget: 2}\n  - {kind: ts_sym, mcmc_budget: 2}\n"
        "  - {kind: greedy}\n  - {kind: ucb}\n")
    code = main(["replay", "--config", str(tmp_path / "null.yaml"), "--out", str(tmp_path / "o")])
    lines = (tmp_path / "o" / "summary.csv").read_text().splitlines()[1:]
    cis = {f[0]: (float(f[4]), float(f[5])) for f in (ln.split(",") for ln in lines)}
    overlap = max(lo for lo, _ in cis.values()) <= min(hi for _, hi in cis.values())
    ok = code == 0 and len(cis) == 4 and overlap
    report("replay null test", ok, f"identical columns, CIs {cis}, overlapping: {overlap}")
    assert ok
