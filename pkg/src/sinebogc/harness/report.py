"""Verification reports: JSON record plus a flat CSV of route values."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _clean(obj):
    if isinstance(obj, complex):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int,)):
        return int(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return _clean(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class Route:
    name: str
    value: complex
    err: float = 0.0
    n: int | None = None

    def to_json(self):
        d = {"name": self.name, "value": complex(self.value), "err": float(self.err)}
        if self.n is not None:
            d["n"] = int(self.n)
        return d


@dataclass
class Check:
    name: str
    value: float
    limit: float
    passed: bool
    note: str = ""

    def to_json(self):
        d = {"name": self.name, "value": self.value, "limit": self.limit, "pass": bool(self.passed)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerificationReport:
    """pass <=> max_rel_gap <= tol and every check passes."""

    identity: str
    tol: float
    config: dict
    routes: list = field(default_factory=list)
    gaps: list = field(default_factory=list)  # (label, relative gap, judged)
    checks: list = field(default_factory=list)
    sweep: list = field(default_factory=list)
    runtime: float = 0.0

    def add(self, name, value, err=0.0, n=None):
        r = Route(name, complex(value), float(err), n)
        self.routes.append(r)
        return r

    def gap(self, label, a, b, judged=True):
        """Record the relative gap of a pair; only judged pairs count toward
        ``max_rel_gap`` (statistical pairs are judged by their own checks)."""
        g = rel_gap(a, b)
        self.gaps.append((label, g, bool(judged)))
        return g

    def check(self, name, value, limit, passed, note=""):
        self.checks.append(Check(name, float(value), float(limit), bool(passed), note))

    @property
    def max_rel_gap(self):
        return max((g for _, g, j in self.gaps if j), default=0.0)

    @property
    def passed(self):
        return self.max_rel_gap <= self.tol and all(c.passed for c in self.checks)

    def to_json(self):
        # runtime is left out so equal inputs give byte-identical reports
        return _clean({
            "identity": self.identity,
            "routes": [r.to_json() for r in self.routes],
            "max_rel_gap": self.max_rel_gap,
            "tol": self.tol,
            "pass": self.passed,
            "gaps": [{"pair": k, "rel_gap": g, "judged": j} for k, g, j in self.gaps],
            "checks": [c.to_json() for c in self.checks],
            "sweep": self.sweep,
            "config": self.config,
        })

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "route", "value_re", "value_im", "err"])
        for r in self.routes:
            v = complex(r.value)
            w.writerow(["" if r.n is None else r.n, r.name, repr(v.real), repr(v.imag), repr(float(r.err))])
        return buf.getvalue()

    def summary_lines(self):
        lines = [f"{self.identity}: {'PASS' if self.passed else 'FAIL'}  max_rel_gap={self.max_rel_gap:.3e}"
                 f"  tol={self.tol:.1e}  ({self.runtime:.1f}s)"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'XX'}] {c.name}: {c.value:.3e} (limit {c.limit:.1e})"
                         + (f"  {c.note}" if c.note else ""))
        return lines


def rel_gap(a, b):
    """|a - b| / max(|a|, |b|), or the absolute gap when both are tiny."""
    a, b = complex(a), complex(b)
    scale = max(abs(a), abs(b))
    d = abs(a - b)
    return d / scale if scale > 1e-300 else d


def write(report: VerificationReport, out=None, csv_path=None):
    if out:
        with open(out, "w") as fh:
            fh.write(report.dumps())
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(report.to_csv())
