import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import GAP_PROB_S01, GAP_PROB_S01_TOL, THEOREM_VALUES
from sinebogc.errors import NumericalFailure, ValidationError
from sinebogc.fredholm import (OperatorMatrix, det_finite, logdet, logdet_series, lu_det, nystrom_det,
                               sine_mult_det)
from sinebogc.sineproc import mean_S
from sinebogc.symbols import SmoothBump


def test_det_finite_trivial():
    assert det_finite(np.zeros((3, 3))).value == 1
    assert det_finite(np.zeros((0, 0))).value == 1
    assert det_finite(np.diag([1.0, 2.0])).value == pytest.approx(6.0)


def test_lu_det_sign():
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert lu_det(P)[0] == pytest.approx(-1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_logdet_routes_agree(m, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    A *= 0.3 / np.linalg.norm(A)  # inside the series domain |A|_F <= 1/2
    direct = np.log(np.linalg.det(np.eye(m) + A))
    assert logdet_series(A) == pytest.approx(direct, abs=1e-13)
    assert logdet(A) == pytest.approx(direct, abs=1e-13)


def test_logdet_series_resolves_tiny_det_minus_one():
    A = np.diag([1e-20, -3e-21])
    assert logdet_series(A) == pytest.approx(7e-21, rel=1e-12)


def test_logdet_series_refuses_large_norm():
    with pytest.raises(NumericalFailure):
        logdet_series(np.eye(3))


def test_operator_matrix_validation():
    with pytest.raises(ValidationError):
        OperatorMatrix(np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        OperatorMatrix(np.zeros((2, 2)), np.array([0.0, 1.0]), np.array([1.0, -1.0]), True)


def test_nystrom_low_rank():
    # det(1 + lam K), K(x, y) = x y on [0, 1]: 1 + lam/3
    r = nystrom_det(lambda x, y: 0.7 * x * y, (0, 1))
    assert r.value == pytest.approx(1 + 0.7 / 3, abs=1e-14)


def test_sine_gap_probability_small_interval():
    r = nystrom_det(lambda x, y: -np.sinc(x - y), (0, 0.1))
    assert abs(r.value - GAP_PROB_S01) < GAP_PROB_S01_TOL


def test_nystrom_rejects_bad_interval():
    with pytest.raises(ValidationError):
        nystrom_det(lambda x, y: x * y, (1, 1))


def test_sine_mult_small_coupling():
    # log E e^{S_f} = int f + Var/2 + O(a^3); Var = a^2 V_1
    from oracles import VARIANCE_A05
    a = 1e-3
    f = SmoothBump(a, 1.0)
    lg = np.log(sine_mult_det(f).value)
    expect = mean_S(f) + 0.5 * VARIANCE_A05 * (a / 0.5) ** 2
    assert abs(lg - expect) < 5 * a**3


def test_sine_mult_matches_frozen():
    f = SmoothBump(0.5, 1.0)
    r = sine_mult_det(f)
    assert np.exp(-mean_S(f)) * r.value == pytest.approx(THEOREM_VALUES[0.5], rel=1e-11)
    assert r.diagnostics["q"] <= 512


def test_sine_mult_zero():
    assert sine_mult_det(SmoothBump(0.0, 1.0)).value == 1
