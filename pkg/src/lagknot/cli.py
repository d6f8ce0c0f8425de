"""Command line entry point: `lagknot verify|table|report`."""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .report import DEFAULT_TOLERANCES, SUITES, TABLE_COLUMNS, Config, emit_table, run_suite

ENV_PREFIX = "LAGKNOT_"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _env(name: str, cast, default):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"lagknot: bad value for {ENV_PREFIX}{name}: {raw!r}")


def _positive(raw: str) -> float:
    v = float(raw)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {raw}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (env LAGKNOT_SEED, default 0)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--timings", action="store_true", help="add runtime_ms to each check")
    common.add_argument("--r-max", type=int, default=None, help="largest twist parameter r in the suites")
    for fam in sorted(DEFAULT_TOLERANCES):
        common.add_argument(f"--tol-{fam}", type=_positive, default=None, dest=f"tol_{fam}",
                            help=f"tolerance family '{fam}' (default {DEFAULT_TOLERANCES[fam]:g})")

    parser = argparse.ArgumentParser(prog="lagknot", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lagknot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=list(SUITES) + ["all"])
    v.add_argument("--format", choices=["json", "md"], default=None)

    t = sub.add_parser("table", parents=[common], help="emit an action, index or E1 table")
    t.add_argument("kind", choices=list(TABLE_COLUMNS))
    t.add_argument("--r", type=int, default=4, help="number of twists is 2r")
    t.add_argument("--format", choices=["json", "csv", "md"], default=None)

    rp = sub.add_parser("report", parents=[common], help="run every suite and write a full report")
    rp.add_argument("--format", choices=["json", "md"], default=None)
    return parser


def config_from_args(args) -> Config:
    tols = {}
    for fam, default in DEFAULT_TOLERANCES.items():
        flag = getattr(args, f"tol_{fam}", None)
        tols[fam] = flag if flag is not None else _env(f"TOL_{fam.upper()}", float, default)
    seed = args.seed if args.seed is not None else _env("SEED", int, 0)
    r_max = args.r_max if args.r_max is not None else _env("R_MAX", int, 4)
    if r_max < 1:
        raise SystemExit("lagknot: --r-max must be at least 1")
    timings = args.timings or _env("TIMINGS", lambda s: s not in ("", "0", "false"), False)
    return Config(seed=seed, tolerances=tols, r_max=r_max, timings=timings)


def _write(text: str, out: str | None) -> int:
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"lagknot: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
    except SystemExit as exc:
        # argparse exits 0 for --help/--version and 2 for usage errors
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK if not exc.code else EXIT_USAGE
    out = args.out if args.out is not None else os.environ.get(ENV_PREFIX + "OUT")
    fmt = args.format or os.environ.get(ENV_PREFIX + "FORMAT")

    if args.command == "table":
        fmt = fmt or "md"
        if fmt not in ("json", "csv", "md"):
            print(f"lagknot: unknown table format {fmt!r}", file=sys.stderr)
            return EXIT_USAGE
        if args.r < 1:
            print("lagknot: --r must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        return _write(emit_table(args.kind, args.r, fmt), out)

    fmt = fmt or ("json" if args.command == "verify" else "md")
    if fmt not in ("json", "md"):
        print(f"lagknot: unknown report format {fmt!r}", file=sys.stderr)
        return EXIT_USAGE
    suite = args.suite if args.command == "verify" else "all"
    doc = run_suite(suite, cfg)
    code = _write(doc.to_json() if fmt == "json" else doc.to_markdown(), out)
    if code:
        return code
    print(f"lagknot: {doc.summary['pass']} passed, {doc.summary['fail']} failed, "
          f"{doc.summary['inconclusive']} inconclusive", file=sys.stderr)
    return EXIT_FAIL if doc.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
