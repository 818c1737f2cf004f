"""Command-line entry point.

Precedence: built-in defaults < JSON config (--config) < --set key=value <
dedicated flags (--seed, --tol, --out, --csv, --figures).

Exit codes: 0 pass, 1 fail, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import NumericalFailure, ValidationError
from . import config as config_mod
from .commands import run
from .report import write

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _parse_set(items):
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="sinebogc", description="Numerical checks of Toeplitz/Fredholm determinant "
                                "identities and sine-process statistics.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in config_mod.DEFAULTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="JSON report path (points CSV for 'sample')")
        sp.add_argument("--csv", help="route values as CSV (n, route, value_re, value_im, err)")
        sp.add_argument("--figures", help="directory for PNG figures")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field; VALUE is parsed as JSON when possible")
        sp.add_argument("--quiet", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_set(args.set)
        for k in ("seed", "tol", "out", "csv", "figures"):
            v = getattr(args, k)
            if v is not None:
                overrides[k] = v
        cfg = config_mod.load(args.config, args.command, overrides)
        rep, text = run(cfg)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    if cfg.command == "sample":
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        write(rep, None, cfg.csv)
    else:
        write(rep, cfg.out, cfg.csv)
        if not cfg.out and not args.quiet:
            sys.stdout.write(rep.dumps())
    if cfg.figures:
        from .plotting import render

        render(rep, cfg.figures)
    if not args.quiet:
        print("\n".join(rep.summary_lines()), file=sys.stderr)
    return EXIT_PASS if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
