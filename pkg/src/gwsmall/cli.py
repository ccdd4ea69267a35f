"""Command-line front end: ``gwsmall {theory,simulate,compare,identity-check}``.

Exit codes: 0 success, 1 comparison or identity failure, 2 usage error,
3 some estimate stopped at max_trials before reaching min_hits,
4 an output file exists with different content.
"""
from __future__ import annotations

import argparse
import glob
import json
import os
import sys

from .config import ExperimentConfig, load_config
from .experiments import ArtifactMismatch, identity_report, run_compare, run_simulate, run_theory


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    fmt = None
    if getattr(args, "format", None):
        fmt = tuple(x.strip() for x in args.format.split(","))
    return cfg.with_overrides(seed=args.seed, out=args.out, formats=fmt)


def _expand(patterns) -> list[str]:
    out = []
    for p in patterns:
        hits = sorted(glob.glob(p))
        out.extend(hits if hits else [p])
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gwsmall", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, threads=False):
        p.add_argument("--config", help="experiment config file")
        p.add_argument("--seed", type=int, help="root seed (unsigned 64-bit); overrides the config")
        p.add_argument("--out", help="output directory; overrides the config")
        p.add_argument("--format", help="csv, json or csv,json")
        p.add_argument("--force", action="store_true", help="overwrite outputs that differ")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")

    common(sub.add_parser("theory", help="tabulate limit laws and identities"))
    common(sub.add_parser("simulate", help="Monte Carlo estimates for every n in the grid"), threads=True)
    p = sub.add_parser("compare", help="join theory and estimate files into a report")
    p.add_argument("--theory", nargs="+", required=True, help="theory CSV/JSON files (globs allowed)")
    p.add_argument("--estimates", nargs="+", required=True, help="estimates_n*.json files (globs allowed)")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p = sub.add_parser("identity-check", help="run the numerical identity suite")
    p.add_argument("--out", help="also write identities.json here")
    p.add_argument("--force", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "theory":
            for p in run_theory(_config(args), force=args.force):
                print(p)
            return 0
        if args.command == "simulate":
            if args.threads < 1:
                print("--threads must be positive", file=sys.stderr)
                return 2
            paths, ok = run_simulate(_config(args), threads=args.threads, force=args.force)
            for p in paths:
                print(p)
            if not ok:
                print("warning: some estimates did not reach min_hits", file=sys.stderr)
                return 3
            return 0
        if args.command == "compare":
            rep = run_compare(_expand(args.theory), _expand(args.estimates), args.out, force=args.force)
            with open(os.path.join(args.out, "report.txt")) as fh:
                sys.stdout.write(fh.read())
            return 0 if rep["pass"] else 1
        if args.command == "identity-check":
            rep = identity_report()
            for r in rep:
                print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['check']}  residual={r['residual']:.3e}")
            if args.out:
                from .experiments import _json_text, write_artifact
                write_artifact(os.path.join(args.out, "identities.json"), _json_text({"checks": rep}), args.force)
            return 0 if all(r["pass"] for r in rep) else 1
    except ArtifactMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
