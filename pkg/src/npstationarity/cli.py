"""Command-line interface: ``npstationarity {test,simulate,experiment,bandwidth}``.

Exit codes: 0 ran (whatever the verdict), 2 bad arguments, 3 bad data,
4 internal contract violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .combiner import PRESETS, TestReport, format_pvalue, stationarity_test
from .core import ArgumentError, ContractViolation, DataError, Series
from .harness import COLUMNS, export_table, load_config, run_experiment
from .multiplier import select_bandwidth
from .simgen import GeneratorSpec, generate

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_CONTRACT = 0, 2, 3, 4


def read_series(path: str, column: int = 1, header: bool = False) -> Series:
    """Numbers from a text/CSV file (``-`` for stdin); ``column`` is 1-based."""
    if column < 1:
        raise ArgumentError("--column is 1-based")
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    values = []
    with fh:
        for lineno, line in enumerate(fh, 1):
            if header and lineno == 1:
                continue
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")] if "," in line else line.split()
            if len(fields) < column:
                raise DataError(f"line {lineno}: no column {column}")
            try:
                values.append(float(fields[column - 1].strip('"')))
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric value {fields[column - 1]!r}") from None
    return Series(np.array(values), path)


def _render(report: TestReport) -> str:
    m = report.meta
    lines = [
        f"preset {m['preset']}  h={m['h']}  N={m['N']}  M={m['M']}  psi={m['psi']}  "
        f"b_n={m['b_n']} ({m['bandwidth_mode']})  seed={m['seed']}",
        f"{'component':<12} {'n':>5} {'weight':>7} {'statistic':>12} {'p-value':>9} {'p x 100':>8}",
    ]
    for c in report.components:
        lines.append(
            f"{c['name']:<12} {c['n']:>5} {c['weight']:>7.4f} {c['statistic']:>12.6g} "
            f"{c['pvalue']:>9.4f} {100 * c['pvalue']:>8.1f}"
        )
    lines.append(
        f"global       W={report.W:.6g}  p={format_pvalue(report.pvalue, m['M'])}  "
        f"p x 100={100 * report.pvalue:.1f}"
    )
    lines += [f"warning: {w}" for w in report.warnings]
    return "\n".join(lines)


def _write(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_test(args) -> int:
    series = read_series(args.input, args.column, args.header)
    report = stationarity_test(
        series,
        preset=args.preset,
        h=args.h,
        M=args.replicates,
        seed=args.seed,
        psi=args.psi,
        bandwidth=args.bandwidth,
        ties="strict" if args.strict_ties else "midrank",
        workers=args.workers,
    )
    _write(report.to_json() if args.json else _render(report), args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = tuple(float(p) for p in args.params.split(",")) if args.params else None
    if params is None:
        spec = GeneratorSpec.parse(args.model, args.n, args.seed, args.innovation)
    else:
        spec = GeneratorSpec(args.model, args.n, args.seed, params, args.innovation)
    x = generate(spec).values
    _write("\n".join(repr(float(v)) for v in x), args.output)
    return EXIT_OK


def cmd_experiment(args) -> int:
    spec = load_config(args.config)
    res = run_experiment(spec, workers=args.workers)
    csv_path, json_path = export_table(res, args.outdir, spec)
    print(" ".join(f"{c:>13}" for c in COLUMNS))
    for r in res.rows:
        vals = ["" if r[c] is None else (f"{r[c]:.1f}" if isinstance(r[c], float) else str(r[c])) for c in COLUMNS]
        print(" ".join(f"{v:>13}" for v in vals))
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_bandwidth(args) -> int:
    series = read_series(args.input, args.column, args.header)
    bw = select_bandwidth(series)
    doc = {"b_n": bw.b_n, "ell_n": bw.ell_n, "mode": bw.mode, "diagnostics": bw.diagnostics}
    if args.json:
        _write(json.dumps(doc, indent=2), args.output)
    else:
        diag = "  ".join(f"{k}={v}" for k, v in bw.diagnostics.items())
        _write(f"b_n={bw.b_n}  ell_n={bw.ell_n}  mode={bw.mode}\n{diag}", args.output)
    return EXIT_OK


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _pos(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="npstationarity", description="Nonparametric stationarity tests for time series.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_input(sp):
        sp.add_argument("--input", required=True, help="text/CSV file, '-' for stdin")
        sp.add_argument("--column", type=_pos, default=1, help="1-based column (default 1)")
        sp.add_argument("--header", action="store_true", help="skip the first line")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--output", help="write to a file instead of stdout")

    t = sub.add_parser("test", help="test one series for stationarity")
    add_input(t)
    t.add_argument("--preset", choices=PRESETS, default="dc")
    t.add_argument("--h", type=_pos, default=2, help="embedding dimension (default 2)")
    t.add_argument("--replicates", type=_pos, default=1000, help="multiplier replicates M")
    t.add_argument("--seed", type=_u64, default=1)
    t.add_argument("--psi", choices=("fisher", "stouffer"), default="fisher")
    t.add_argument("--bandwidth", type=_pos, default=None, help="fixed b_n (default: automatic)")
    t.add_argument("--strict-ties", action="store_true", help="reject input with tied values")
    t.add_argument("--workers", type=_pos, default=1)
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="draw a series from one of the simulation models")
    s.add_argument("--model", required=True, help="e.g. N1, A9, 'D(3)', 'DS(4,0.7)'")
    s.add_argument("--n", type=_pos, required=True)
    s.add_argument("--seed", type=_u64, default=1)
    s.add_argument("--params", help="comma-separated model parameters")
    s.add_argument("--innovation", choices=("normal", "t4"), default="normal")
    s.add_argument("--output")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment from an INI config")
    e.add_argument("--config", required=True)
    e.add_argument("--outdir", default=".")
    e.add_argument("--workers", type=_pos, default=1)
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bandwidth", help="show the automatic multiplier bandwidth")
    add_input(b)
    b.set_defaults(func=cmd_bandwidth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
