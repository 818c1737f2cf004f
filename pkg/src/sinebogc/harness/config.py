"""Run configuration: one JSON document, with command-line overrides on top."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from ..errors import ValidationError
from ..symbols import symbol_from_json

# per-command defaults; tolerances follow the kind of identity checked
DEFAULTS = {
    "verify-andreief": {"tol": 1e-8, "n_values": list(range(1, 31))},
    "verify-bogc": {"tol": 1e-8, "n_values": list(range(1, 21))},
    "verify-scaling": {"tol": 1e-3, "n_values": [8, 16, 32, 64]},
    "verify-theorem": {"tol": 1e-6, "n_values": [64]},
    "verify-kernel-scaling": {"tol": 0.05, "n_values": [16, 32, 64, 128]},
    "sample": {"tol": 0.5, "n_values": []},
}

POSITIVE_INT = ("K_max", "M", "q", "N", "quad_points", "grid_points", "workers")
POSITIVE_FLOAT = ("du", "U_max", "pad", "trace_tol", "szego_tol", "tail_tol", "scaling_tol", "mc_sigmas")


@dataclass
class RunConfig:
    command: str = ""
    symbol: dict | None = None
    exponentiate: bool = False
    n_values: list | None = None
    routes: list | None = None
    K_max: int | None = None
    M: int | None = None
    q: int | None = None
    du: float | None = None
    U_max: float | None = None
    N: int | None = None
    seed: int = 0
    tol: float | None = None
    quad_points: int | None = None
    window: list | None = None
    pad: float = 2.0
    interval: list = field(default_factory=lambda: [-2.0, 2.0])
    grid_points: int = 33
    szego_n: list = field(default_factory=lambda: [10, 20, 40, 80])
    trace_levels: list = field(default_factory=lambda: [1, 2])
    trace_tol: float = 1e-4
    szego_tol: float = 1e-6
    tail_tol: float = 1e-12
    scaling_tol: float = 1e-3
    mc_sigmas: float = 3.0
    workers: int = 1
    # outputs
    out: str | None = None
    csv: str | None = None
    figures: str | None = None

    def spec(self):
        if self.symbol is None:
            raise ValidationError("config needs a 'symbol'")
        return symbol_from_json(self.symbol)

    def to_json(self):
        d = asdict(self)
        # output locations do not change results; keep them out of the echo
        for k in ("out", "csv", "figures"):
            d.pop(k)
        return d


_FIELDS = {f.name for f in fields(RunConfig)}


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command and cfg.command not in DEFAULTS:
        raise ValidationError(f"unknown command {cfg.command!r}")
    for k in POSITIVE_INT:
        v = getattr(cfg, k)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v <= 0):
            raise ValidationError(f"{k} must be a positive integer")
    for k in POSITIVE_FLOAT:
        v = getattr(cfg, k)
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            raise ValidationError(f"{k} must be positive")
    if cfg.tol is not None and not (0 < cfg.tol < 1):
        raise ValidationError("tol must lie in (0, 1)")
    if not isinstance(cfg.seed, int) or cfg.seed < 0 or cfg.seed >= 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")
    for key in ("n_values", "szego_n"):
        v = getattr(cfg, key)
        if v is not None and not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in v):
            raise ValidationError(f"{key} must be positive integers")
    for key in ("window", "interval"):
        v = getattr(cfg, key)
        if v is not None and (len(v) != 2 or not float(v[1]) >= float(v[0])):
            raise ValidationError(f"{key} must be [lo, hi] with lo <= hi")
    if not set(cfg.trace_levels) <= {1, 2, 3}:
        raise ValidationError("trace_levels must be drawn from 1, 2, 3")
    if cfg.symbol is not None:
        cfg.spec()
    return cfg


def from_dict(d: dict, command: str = "") -> RunConfig:
    if not isinstance(d, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(d) - _FIELDS
    if unknown:
        raise ValidationError(f"unknown config fields: {', '.join(sorted(unknown))}")
    cfg = RunConfig(**d)
    if command:
        if cfg.command and cfg.command != command:
            raise ValidationError(f"config is for {cfg.command!r}, not {command!r}")
        cfg.command = command
    for k, v in DEFAULTS.get(cfg.command, {}).items():
        if getattr(cfg, k) is None:
            setattr(cfg, k, list(v) if isinstance(v, list) else v)
    return validate(cfg)


def load(path=None, command="", overrides=None) -> RunConfig:
    """Config from a JSON file (optional), then ``overrides`` on top."""
    d = {}
    if path:
        try:
            with open(path) as fh:
                d = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    d = dict(d)
    for k, v in (overrides or {}).items():
        if v is not None:
            d[k] = v
    return from_dict(d, command)
