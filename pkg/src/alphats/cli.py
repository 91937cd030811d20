"""Command-line entry point: ``alphats <subcommand>``.

Exit codes: 0 success, 1 usage or validation error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import DATASET_KINDS, DatasetManifest, load_config, save_manifest
from .errors import AlphaTSError, ConfigError, DataError, DegenerateInputError
from .estimation import MIN_SAMPLES, estimate_all
from .harness import WORKERS_ENV, run_experiment, write_outputs
from .io import log_returns, read_matrix, read_series, read_trace, sha256_file, write_matrix, \
    write_rows, write_series
from .stable import StableParams, sample

EXIT_OK, EXIT_INVALID, EXIT_DATA = 0, 1, 2

log = logging.getLogger("alphats")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fit_line(report) -> str:
    p = report.params
    row = report.table_row()
    flags = []
    if report.alpha_clamped:
        flags.append("alpha clamped")
    if report.beta_clamped:
        flags.append("beta clamped")
    extra = f" ({', '.join(flags)})" if flags else ""
    return (f"theta={row['theta']:.6g} alpha={p.alpha:.4f} beta={p.beta:.4f} "
            f"sigma={p.sigma:.6g} mu={p.mu:.6g}{extra}")


def cmd_sample(args) -> int:
    if args.count < 1:
        raise UsageError("sample: --count must be >= 1")
    try:
        params = StableParams(args.alpha, args.beta, args.sigma, args.mu)
    except ValueError as exc:
        raise UsageError(f"sample: {exc}") from None
    draws = sample(params, args.count, np.random.default_rng(args.seed))
    out = Path(args.out)
    write_series(out, draws)
    q1, q2, q3 = np.percentile(draws, [25, 50, 75])
    print(f"wrote {args.count} draws to {out}")
    print(f"quartiles: {q1:.6g} {q2:.6g} {q3:.6g}")
    if args.count >= MIN_SAMPLES:
        print("quick fit: " + _fit_line(estimate_all(draws)))
    return EXIT_OK


def cmd_estimate(args) -> int:
    series = read_series(args.data, column=args.column, pool=args.pool, header=args.header,
                         delimiter=args.delimiter)
    if args.log_returns:
        series = log_returns(series)
    report = estimate_all(series)
    row = report.table_row()
    print(f"n={report.n_samples} " + _fit_line(report))
    if args.out:
        write_rows(args.out, ("source", "n", "theta", "alpha", "beta", "sigma", "mu"),
                   [(Path(args.data).name, report.n_samples, row["theta"], row["alpha"],
                     row["beta"], row["sigma"], report.params.mu)])
    return EXIT_OK


def _run(args, replay: bool) -> int:
    cfg = load_config(args.config)
    if cfg.is_replay != replay:
        want = "replay" if replay else "synthetic"
        raise ConfigError(f"environment.kind: this subcommand needs a {want} environment")
    if args.seed is not None:
        cfg = type(cfg)(cfg.environment, cfg.horizon, (args.seed,), cfg.policies, cfg.out_dir,
                        cfg.master_seed, cfg.allow_gaussian, cfg.base_dir)
    out_dir = Path(args.out) if args.out else cfg.base_dir / cfg.out_dir
    traces = run_experiment(cfg)
    paths = write_outputs(traces, cfg, out_dir)
    with open(paths["summary"], encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    truncated = sum(tr.truncated for tr in traces)
    if truncated:
        print(f"note: {truncated} run(s) ended early when a replay column ran out")
    print(f"wrote {paths['trace']}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    src = Path(args.path)
    matrix, names = read_matrix(src, delimiter=args.delimiter, header=args.header)
    if args.kind == "price-series":
        matrix = log_returns(matrix)
    out_dir = Path(args.out) if args.out else src.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = src.stem
    matrix_path = out_dir / f"{stem}.matrix.csv"
    write_matrix(matrix_path, matrix, names if args.header else None)
    manifest = DatasetManifest(
        path=matrix_path.name,
        kind=args.kind,
        rows=int(matrix.shape[0]),
        columns=int(matrix.shape[1]),
        checksum=sha256_file(matrix_path),
        delimiter=",",
        header=bool(args.header),
        source=src.name,
        source_checksum=sha256_file(src),
    )
    manifest_path = out_dir / f"{stem}.manifest.yaml"
    save_manifest(manifest, manifest_path)
    print(f"{manifest.rows} rows x {manifest.columns} columns -> {matrix_path}")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = read_trace(args.trace)
    problems = []
    groups: dict = {}
    for i, r in enumerate(rows, start=2):
        groups.setdefault((r["policy"], r["seed"]), []).append((i, r))
    for (policy, seed), items in groups.items():
        cum = 0.0
        for expected_t, (line, r) in enumerate(items, start=1):
            if r["t"] != expected_t:
                problems.append(f"line {line}: {policy}/{seed} t={r['t']}, expected {expected_t}")
                break
            if r["inst_regret"] < 0:
                problems.append(f"line {line}: negative inst_regret")
            cum += r["inst_regret"]
            if r["cum_regret"] != cum:
                problems.append(f"line {line}: cum_regret {r['cum_regret']!r} != prefix sum {cum!r}")
                break
    if problems:
        for p in problems[:20]:
            print(p, file=sys.stderr)
        print(f"FAIL: {len(problems)} problem(s) in {args.trace}", file=sys.stderr)
        return EXIT_DATA
    print(f"OK: {len(rows)} rows in {len(groups)} runs")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="alphats", description="Thompson sampling for skewed alpha-stable bandits")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="draw stable variates to a file")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--count", "-n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("estimate", help="ECF fit of a numeric series (Theta, alpha, beta, sigma)")
    e.add_argument("data")
    e.add_argument("--column", type=int, default=None, help="0-based column to use")
    e.add_argument("--pool", action="store_true", help="use every cell of the matrix")
    e.add_argument("--log-returns", action="store_true", help="treat values as prices")
    e.add_argument("--header", action="store_true")
    e.add_argument("--delimiter", default=",")
    e.add_argument("--out", default=None, help="CSV file for the fitted row")
    e.set_defaults(func=cmd_estimate)

    for name, replay, text in (("run", False, "synthetic regret experiment"),
                               ("replay", True, "regret experiment on recorded data")):
        r = sub.add_parser(name, help=text,
                           description=f"{text}; worker count from ${WORKERS_ENV}")
        r.add_argument("--config", required=True)
        r.add_argument("--out", default=None, help="output directory (overrides out_dir)")
        r.add_argument("--seed", type=int, default=None, help="run this single seed only")
        r.set_defaults(func=lambda a, _r=replay: _run(a, _r))

    i = sub.add_parser("ingest", help="normalize a CSV and write a checksummed manifest")
    i.add_argument("path")
    i.add_argument("--kind", choices=DATASET_KINDS, required=True)
    i.add_argument("--header", action="store_true")
    i.add_argument("--delimiter", default=",")
    i.add_argument("--out", default=None, help="output directory (default: next to input)")
    i.set_defaults(func=cmd_ingest)

    v = sub.add_parser("verify", help="check a trace CSV's cumulative regret column")
    v.add_argument("trace")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DataError, DegenerateInputError, AlphaTSError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
