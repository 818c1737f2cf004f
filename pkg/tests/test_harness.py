import json
import math
import os
import subprocess
import sys

import pytest

from sinebogc.errors import ValidationError
from sinebogc.harness import RunConfig, VerificationReport, from_dict, load, rel_gap, run
from sinebogc.harness.cli import main

COS05 = {"kind": "trig", "coeffs": {"1": 0.5, "-1": 0.5}}
BUMP05 = {"kind": "bump", "a": 0.5, "w": 1.0}


def _cfg(command, **kw):
    return from_dict(kw, command)


def test_defaults_applied():
    cfg = _cfg("verify-bogc", symbol=COS05)
    assert cfg.tol == 1e-8 and cfg.n_values == list(range(1, 21))
    assert _cfg("verify-theorem", symbol=BUMP05).tol == 1e-6


@pytest.mark.parametrize("bad", [{"tol": 1.5}, {"tol": 0}, {"M": -2}, {"N": 0}, {"seed": -1}, {"du": 0.0},
                                 {"n_values": [0, 3]}, {"window": [2, 1]}, {"colour": "red"},
                                 {"symbol": {"kind": "bump", "w": 0}}, {"trace_levels": [4]}])
def test_config_rejects(bad):
    with pytest.raises(ValidationError):
        from_dict(bad, "verify-bogc")


def test_config_command_mismatch():
    with pytest.raises(ValidationError):
        from_dict({"command": "sample"}, "verify-bogc")


def test_load_precedence(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"symbol": COS05, "tol": 1e-9, "seed": 4}))
    cfg = load(str(p), "verify-bogc", {"seed": 7})
    assert cfg.tol == 1e-9 and cfg.seed == 7


def test_load_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{nope")
    with pytest.raises(ValidationError):
        load(str(p), "verify-bogc")


def test_report_pass_rule_and_json():
    rep = VerificationReport("x", 1e-6, {"k": 1})
    rep.add("a", 1.0 + 0j, 1e-9, 3)
    rep.add("b", 1.0 + 1e-7j)
    rep.gap("a~b", 1.0, 1.0 + 1e-7j)
    rep.gap("a~mc", 1.0, 1.1, judged=False)
    assert rep.passed and rep.max_rel_gap == pytest.approx(1e-7)
    rep.check("c", 1.0, 0.5, False)
    assert not rep.passed
    d = json.loads(rep.dumps())
    assert set(d) >= {"identity", "routes", "max_rel_gap", "pass", "config"}
    assert d["routes"][0] == {"name": "a", "value": [1.0, 0.0], "err": 1e-9, "n": 3}
    assert "runtime" not in d


def test_report_nonfinite_and_csv():
    rep = VerificationReport("x", 1e-6, {})
    rep.add("a", complex(math.inf, 0))
    assert json.loads(rep.dumps())["routes"][0]["value"] == ["inf", 0.0]
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,route,value_re,value_im,err"
    assert lines[1].startswith(",a,")


def test_rel_gap():
    assert rel_gap(1, 1) == 0
    assert rel_gap(0, 0) == 0
    assert rel_gap(2, 1) == pytest.approx(0.5)


def test_andreief_trivial_and_triangular():
    for sym in ({"kind": "trig", "coeffs": {"0": 1.0}}, {"kind": "trig", "coeffs": {"0": 1.0, "1": 0.3}}):
        rep, _ = run(_cfg("verify-andreief", symbol=sym, n_values=[1, 5, 10]))
        assert rep.passed
        assert all(abs(r.value - 1) < 1e-12 for r in rep.routes)


def test_bogc_one_sided_routes_are_one():
    rep, _ = run(_cfg("verify-bogc", symbol={"kind": "trig", "coeffs": {"1": 0.2, "3": 0.1}}, n_values=[1, 4]))
    assert rep.passed
    assert all(abs(r.value - 1) < 1e-13 for r in rep.routes if r.name != "szego_limit")


def test_scaling_zero_symbol():
    rep, _ = run(_cfg("verify-scaling", symbol={"kind": "bump", "a": 0.0, "w": 1.0}, n_values=[4, 8]))
    assert rep.passed
    assert all(abs(r.value - 1) < 1e-13 for r in rep.routes if not r.name.startswith("trace"))


def test_scaling_rejects_small_n():
    with pytest.raises(ValidationError):
        run(_cfg("verify-scaling", symbol={"kind": "bump", "a": 0.5, "w": 4.0}, n_values=[1, 2]))


def test_theorem_zero_symbol_all_routes_one():
    rep, _ = run(_cfg("verify-theorem", symbol={"kind": "bump", "a": 0.0, "w": 1.0}, N=20, n_values=[8]))
    assert rep.passed
    assert {r.name for r in rep.routes} == {"theorem_rhs", "sine_mult_det", "scaling_tail", "mc_regularized"}
    assert all(abs(r.value - 1) < 1e-13 for r in rep.routes)


def test_theorem_wrong_symbol_kind():
    with pytest.raises(ValidationError):
        run(_cfg("verify-theorem", symbol=COS05))


def test_kernel_scaling_report():
    rep, _ = run(_cfg("verify-kernel-scaling", n_values=[16, 32, 64]))
    assert rep.passed
    sups = [r.value.real for r in rep.routes]
    assert sups[0] > sups[1] > sups[2]


def test_sample_empty_window_and_csv():
    rep, text = run(_cfg("sample", window=[1.0, 1.0]))
    assert text == "x\n" and rep.passed
    rep, text = run(_cfg("sample", window=[0.0, 4.0], seed=3))
    rep2, text2 = run(_cfg("sample", window=[0.0, 4.0], seed=3))
    assert text == text2 and text.startswith("x\n")


def test_sample_mean_count_check():
    rep, text = run(_cfg("sample", window=[0.0, 5.0], N=2000, seed=1))
    assert rep.passed and text.startswith("sample,x\n")
    assert rep.checks[0].name == "mean_count_within_sigmas"


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    sym = json.dumps(COS05)
    assert main(["verify-andreief", "--set", f"symbol={sym}", "--set", "exponentiate=true", "--set", "n_values=[1,2,3]",
                 "--out", str(out), "--quiet"]) == 0
    assert json.loads(out.read_text())["pass"] is True
    assert main(["verify-andreief", "--set", f"symbol={sym}", "--tol", "2", "--quiet"]) == 2
    assert main(["verify-bogc", "--set", "symbol=" + json.dumps({"kind": "trig", "coeffs": {"0": 1, "1": 0.1}}),
                 "--quiet"]) == 2
    # an unreachable truncation bound is a numerical failure
    assert main(["verify-bogc", "--set", f"symbol={sym}", "--set", "M=1", "--set", "tail_tol=1e-300",
                 "--set", "n_values=[2]", "--set", "szego_n=[]", "--quiet"]) == 3
    # a failing identity: tolerance tighter than rounding
    assert main(["verify-andreief", "--set", f"symbol={sym}", "--set", "exponentiate=true", "--tol", "1e-300",
                 "--quiet"]) == 1


def test_cli_csv_and_figures(tmp_path):
    csv_path, fig = tmp_path / "r.csv", tmp_path / "figs"
    code = main(["verify-bogc", "--set", f"symbol={json.dumps(COS05)}", "--set", "n_values=[1,2,4,8]",
                 "--csv", str(csv_path), "--figures", str(fig), "--out", str(tmp_path / "r.json"), "--quiet"])
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "n,route,value_re,value_im,err" and len(rows) == 1 + 8 + 4
    assert (fig / "bogc_rel_gap.png").exists() and (fig / "bogc_szego_gap.png").exists()


def test_module_entry_point(tmp_path):
    out = tmp_path / "k.json"
    r = subprocess.run([sys.executable, "-m", "sinebogc", "verify-kernel-scaling", "--out", str(out), "--quiet"],
                       capture_output=True, text=True, env=dict(os.environ))
    assert r.returncode == 0, r.stderr
    assert json.loads(out.read_text())["identity"] == "kernel-scaling"


def test_config_echo_is_exact():
    cfg = _cfg("verify-andreief", symbol=COS05, n_values=[2], seed=5, out="/tmp/ignored.json")
    rep, _ = run(cfg)
    echo = json.loads(rep.dumps())["config"]
    assert echo == json.loads(json.dumps(cfg.to_json()))
    assert RunConfig(**{k: v for k, v in echo.items()}).seed == 5
