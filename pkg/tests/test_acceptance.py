"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line
in the terminal summary."""

import math
import time

import numpy as np
import pytest

from oracles import THEOREM_VALUES
from sinebogc.fredholm import sine_mult_det
from sinebogc.harness import from_dict, run
from sinebogc.hankel import exterior_trace_continual, exterior_trace_discrete
from sinebogc.sineproc import mc_linear_variance, mean_S, theorem_rhs, variance_S, variance_spectral
from sinebogc.symbols import SmoothBump, TrigPolynomial, fourier_line, fourier_torus, scale_to_torus, symbol_from_json

BUMP05 = {"kind": "bump", "a": 0.5, "w": 1.0}


def trig(coeffs):
    return TrigPolynomial({k: complex(c) for k, c in coeffs.items()}).to_json()


def random_real_trig(rng, K=4, cap=0.3):
    out = {}
    for k in range(1, K + 1):
        c = rng.uniform(0, cap) * np.exp(2j * np.pi * rng.uniform())
        out[k], out[-k] = c, np.conj(c)
    return trig(out)


ANDREIEF_SYMBOLS = [
    (trig({0: 1.0}), False),
    (trig({0: 1.0, 1: 0.3}), False),
    (trig({1: 0.25, -1: 0.25}), True),
    (trig({1: 0.5, -1: 0.5}), True),
    (trig({1: 0.75, -1: 0.75}), True),
    (trig({1: 0.3, -2: 0.2j}), True),
    (trig({1: 0.2, -1: 0.2, 2: 0.1, -2: 0.1}), True),
    (trig({3: 0.25, -3: 0.25}), True),
    (trig({0: 2.0, 1: 0.5, -1: 0.5}), False),
    (random_real_trig(np.random.default_rng(7)), True),
]


def test_1_andreief(record):
    t0 = time.perf_counter()
    worst = 0.0
    for sym, ex in ANDREIEF_SYMBOLS:
        rep, _ = run(from_dict({"symbol": sym, "exponentiate": ex}, "verify-andreief"))
        assert rep.config["n_values"] == list(range(1, 31))
        worst = max(worst, rep.max_rel_gap)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10
    record("1 Andreief identity", ok, f"10 symbols, n=1..30, max rel gap {worst:.2e} (<= 1e-8), {dt:.1f}s (< 10s)")
    assert ok


def test_2_bogc(record):
    rng = np.random.default_rng(2024)
    syms = [trig({1: a, -1: a}) for a in (0.25, 0.5, 0.75)] + [random_real_trig(rng) for _ in range(5)]
    t0 = time.perf_counter()
    worst, tail = 0.0, 0.0
    for sym in syms:
        assert symbol_from_json(sym).is_real
        rep, _ = run(from_dict({"symbol": sym, "szego_n": []}, "verify-bogc"))
        worst = max(worst, rep.max_rel_gap)
        tail = max(tail, max(d["tail_bound"] for d in rep.sweep if "tail_bound" in d))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and tail < 1e-12 and dt < 60
    record("2 BOGC identity", ok, f"8 symbols, n=1..20, max rel gap {worst:.2e} (<= 1e-8), certified tail "
           f"{tail:.1e} (< 1e-12), {dt:.1f}s (< 60s)")
    assert ok


def test_3_strong_szego(record):
    details, ok = [], True
    for a in (0.25, 0.5, 0.75):
        rep, _ = run(from_dict({"symbol": trig({1: a, -1: a}), "n_values": [1], "szego_n": [10, 20, 40, 80]},
                               "verify-bogc"))
        rows = [d for d in rep.sweep if "szego_log10_gap" in d]
        logs = [d["szego_log10_gap"] for d in rows]
        assert rows[0]["n"] == 10 and rows[-1]["n"] == 80
        assert math.isclose(abs(rep.routes[-1].value), math.exp(a * a), rel_tol=1e-15)
        mono = all(y < x for x, y in zip(logs[:-1], logs[1:]))
        ok &= mono
        details.append(f"a={a}: log10 gap " + " > ".join(f"{v:.1f}" for v in logs))
        if a == 0.5:
            last = rows[-1]["szego_gap"]
            ok &= last < 1e-6
            details.append(f"n=80 gap {last:.1e} (< 1e-6)")
    record("3 Strong Szego limit", ok, "; ".join(details))
    assert ok


def test_4_scaling(record):
    rep, _ = run(from_dict({"symbol": BUMP05}, "verify-scaling"))
    assert rep.config["n_values"] == [8, 16, 32, 64]
    gaps = [d["rel_gap"] for d in rep.sweep if "rel_gap" in d]
    decreasing = all(y < x for x, y in zip(gaps[:-1], gaps[1:]))
    tr = {l: [d["trace_gap"] for d in rep.sweep if d.get("trace_level") == l] for l in (1, 2)}
    ok = decreasing and gaps[-1] < 1e-3 and all(tr[l][-1] < 1e-4 for l in (1, 2)) and rep.passed
    record("4 Scaling lemma", ok, "gaps " + ", ".join(f"{g:.2e}" for g in gaps)
           + f" (n=64 < 1e-3); trace gaps at n=64: l=1 {tr[1][-1]:.1e}, l=2 {tr[2][-1]:.1e} (< 1e-4)")
    assert ok


def test_5_theorem(record):
    cases = [(0.25, 0.25), (0.5, 0.5), (1.0, 1.0), ("0.3i", 0.3j)]
    t0 = time.perf_counter()
    gaps = []
    for key, a in cases:
        f = SmoothBump(a, 1.0)
        th = theorem_rhs(f).value
        direct = np.exp(-mean_S(f)) * sine_mult_det(f).value
        gaps.append(abs(th - direct) / abs(direct))
        assert th == pytest.approx(THEOREM_VALUES[key], rel=1e-9)
    dt = time.perf_counter() - t0
    ok = max(gaps) <= 1e-6 and dt < 120
    record("5 Theorem, deterministic routes", ok, ", ".join(f"a={k}: {g:.1e}" for (k, _), g in zip(cases, gaps))
           + f" (<= 1e-6), {dt:.1f}s (< 120s)")
    assert ok


def test_6_monte_carlo(record):
    t0 = time.perf_counter()
    rep, _ = run(from_dict({"symbol": BUMP05, "N": 100000, "seed": 1, "routes": ["theorem", "mc"]},
                           "verify-theorem"))
    dt = time.perf_counter() - t0
    chk = [c for c in rep.checks if c.name == "mc_within_sigmas"][0]
    se = rep.routes[-1].err
    ok = chk.passed and dt < 300
    record("6 Monte Carlo consistency", ok, f"N=1e5 seed 1: |MC - det| = {chk.value:.2e} = {chk.value / se:.2f} "
           f"stderr (<= 3), {dt:.1f}s (< 300s)")
    assert ok


def test_7_variance(record):
    f = SmoothBump(0.5, 1.0)
    quad = variance_S(f)
    spectral = variance_spectral(f)
    rel = abs(quad - spectral) / spectral
    var, se, _ = mc_linear_variance(f, 10000, 5)
    z = abs(var - quad) / se
    ok = rel <= 1e-5 and z <= 3
    record("7 Variance identity", ok, f"quadrature vs spectral rel {rel:.1e} (<= 1e-5); MC variance over 1e4: "
           f"{var:.5f} vs {quad:.5f}, {z:.2f} sigma (<= 3)")
    assert ok


def test_8_trace_bounds(record):
    checked, bad = 0, []
    rep, _ = run(from_dict({"symbol": BUMP05, "n_values": [8, 16], "trace_levels": [1, 2, 3]}, "verify-scaling"))
    for c in rep.checks:
        if "bound" in c.name:
            checked += 1
            if not c.passed:
                bad.append(c.name)
    for r in (SmoothBump(0.25, 1.0), SmoothBump(1.0, 1.0), SmoothBump(-0.7, 0.6, 0.3)):
        sd = fourier_line(r)
        U = int(math.ceil(sd.U_max))
        R = fourier_torus(scale_to_torus(r, 16), 16 * U)
        for l in (1, 2, 3):
            for t in (exterior_trace_continual(sd, l), exterior_trace_discrete(R, l)):
                checked += 1
                if not t.within_bound:
                    bad.append(f"{r.to_json()} l={l}")
    ok = not bad
    record("8 Trace bounds", ok, f"{checked} exterior traces (l=1,2,3, discrete and continual), "
           f"{len(bad)} violations")
    assert ok, bad


def test_9_determinism(record):
    configs = [
        ("verify-andreief", {"symbol": trig({1: 0.5, -1: 0.5}), "exponentiate": True}),
        ("verify-bogc", {"symbol": trig({1: 0.3, -1: 0.3, 2: 0.1, -2: 0.1}), "n_values": [1, 5, 9]}),
        ("verify-kernel-scaling", {}),
        ("verify-theorem", {"symbol": BUMP05, "N": 2000, "seed": 42, "routes": ["direct", "mc", "scaling"]}),
        ("sample", {"window": [0, 8], "N": 50, "seed": 9}),
    ]
    same = []
    for cmd, d in configs:
        outs = []
        for _ in range(2):
            rep, text = run(from_dict(dict(d), cmd))
            outs.append((rep.dumps(), rep.to_csv(), text))
        same.append(outs[0] == outs[1])
    ok = all(same)
    record("9 Determinism", ok, f"{sum(same)}/{len(same)} commands give byte-identical JSON, CSV and samples")
    assert ok
