"""Regenerate the bundled surrogate datasets.

The original market and latency recordings are not redistributable and
cannot be fetched offline, so these files are synthetic stand-ins drawn
with fixed seeds.  Parameters were fixed before any estimate was run on
the output and are not tuned afterwards.

stocks_prices.csv
    1018 daily closing prices (1017 log returns) for 10 tickers.  Column
    AIV has log returns ~ S_1.38(0.0011, -0.21, mu) with
    mu = 7.71e-5 / (2 - 2^(1/1.38)); the other tickers use nearby scales
    and locations.  Seed 20160701.
wireless_series.csv
    1361 values ~ S_1.72(0.0011, -0.32, mu) with
    mu = 1.71e-5 / (2 - 2^(1/1.72)).  Seed 1361760.
latency_matrix.csv
    1361 x 60 access delays in milliseconds: a per-site base delay plus
    right-skewed stable jitter, floored at 1 ms.  Seed 1361760 (second
    spawned stream).

Run from the repository root:  python data/make_surrogates.py
"""

from pathlib import Path

import numpy as np

from alphats.io import write_matrix, write_series
from alphats.stable import StableParams, sample

HERE = Path(__file__).resolve().parent


def location(theta, alpha):
    return theta / (2.0 - 2.0 ** (1.0 / alpha))


def stock_prices(rng):
    n_returns, tickers = 1017, ["AIV"] + [f"T{i:02d}" for i in range(1, 10)]
    cols = []
    for j, _ in enumerate(tickers):
        if j == 0:
            p = StableParams(1.38, -0.21, 0.0011, location(7.71e-5, 1.38))
        else:
            p = StableParams(1.38, -0.21, 0.0011 * rng.uniform(0.7, 1.4),
                             location(7.71e-5, 1.38) * rng.uniform(-3.0, 3.0))
        r = sample(p, n_returns, rng)
        cols.append(50.0 * np.exp(np.concatenate([[0.0], np.cumsum(r)])))
    return np.column_stack(cols), tickers


def wireless_series(rng):
    return sample(StableParams(1.72, -0.32, 0.0011, location(1.71e-5, 1.72)), 1361, rng)


def latency_matrix(rng, rows=1361, cols=60):
    base = rng.uniform(40.0, 60.0, size=cols)
    jitter = rng.uniform(2.0, 6.0, size=cols)
    out = np.empty((rows, cols))
    for j in range(cols):
        x = sample(StableParams(1.6, 0.6, jitter[j], 0.0), rows, rng)
        out[:, j] = np.maximum(base[j] + x, 1.0)
    return np.round(out, 3)


def main():
    prices, names = stock_prices(np.random.default_rng(20160701))
    write_matrix(HERE / "stocks_prices.csv", np.round(prices, 6), names)
    wl_seq = np.random.SeedSequence(1361760).spawn(2)
    write_series(HERE / "wireless_series.csv", wireless_series(np.random.default_rng(wl_seq[0])))
    write_matrix(HERE / "latency_matrix.csv", latency_matrix(np.random.default_rng(wl_seq[1])))


if __name__ == "__main__":
    main()
