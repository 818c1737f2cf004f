import math

import mpmath as mp
import numpy as np
import pytest

from oracles import SZEGO_GAP_A05_N10, TOEPLITZ_BESSEL_A05
from sinebogc.errors import ValidationError
from sinebogc.symbols import TrigPolynomial, fourier_torus, fourier_torus_exp
from sinebogc.toeplitz import dirichlet_det, dirichlet_kernel, toeplitz_det, toeplitz_matrix


def _eF(a, K=40):
    sd, _ = fourier_torus_exp(TrigPolynomial.cosine(a), K, center=False)
    return sd


@pytest.mark.parametrize("n", sorted(TOEPLITZ_BESSEL_A05))
def test_bessel_toeplitz_oracle(n):
    assert toeplitz_det(_eF(0.5), n).value.real == pytest.approx(TOEPLITZ_BESSEL_A05[n], rel=1e-14)


def test_szego_gap_needs_extended_precision():
    # the true gap at n = 10 is ~1e-22: double-precision LU only sees rounding
    gap = toeplitz_det(_eF(0.5), 10).value - math.exp(0.25)
    assert abs(gap) < 1e-14
    assert abs(gap - SZEGO_GAP_A05_N10) < 1e-14


def test_mpmath_crosscheck_n10():
    mp.mp.dps = 40
    T = mp.matrix(10, 10)
    for i in range(10):
        for j in range(10):
            T[i, j] = mp.besseli(abs(i - j), 1)
    assert float(mp.det(T) - mp.e**0.25) == pytest.approx(SZEGO_GAP_A05_N10, rel=1e-10)


def test_trivial_symbols():
    one = fourier_torus(TrigPolynomial({0: 1.0}), 10)
    tri = fourier_torus(TrigPolynomial({0: 1.0, 1: 0.3}), 10)
    for n in (1, 4, 11):
        assert toeplitz_det(one, n).value == pytest.approx(1.0, abs=1e-15)
        assert dirichlet_det(one, n).value == pytest.approx(1.0, abs=1e-13)
        assert toeplitz_det(tri, n).value == pytest.approx(1.0, abs=1e-15)
        assert dirichlet_det(tri, n).value == pytest.approx(1.0, abs=1e-13)


def test_matrix_layout():
    sd = fourier_torus(TrigPolynomial({1: 2.0, -1: 3.0, 0: 1.0}), 4)
    T = toeplitz_matrix(sd, 3)
    # T_ij = F^(i - j)
    assert T[1, 0] == 2.0 and T[0, 1] == 3.0 and T[0, 0] == 1.0


def test_toeplitz_needs_coefficients():
    with pytest.raises(ValidationError):
        toeplitz_matrix(fourier_torus(TrigPolynomial({1: 0.1}), 2), 5)


def test_dirichlet_kernel_closed_form():
    d = np.linspace(-3, 3, 31)
    for n in (1, 2, 7):
        direct = np.exp(1j * np.outer(d, np.arange(n))).sum(axis=1)
        assert np.allclose(dirichlet_kernel(n, d), direct, atol=1e-13)
    assert dirichlet_kernel(5, 0.0) == pytest.approx(5)


def test_dirichlet_projection_rank():
    n, Q = 5, 40
    th = 2 * np.pi * np.arange(Q) / Q
    K = dirichlet_kernel(n, th[:, None] - th[None, :]) / Q
    assert np.allclose(K @ K, K, atol=1e-13)
    assert round(np.trace(K).real) == n


def test_andreief_exponential_symbol():
    sd = _eF(0.5)
    for n in (1, 3, 12, 30):
        t, d = toeplitz_det(sd, n).value, dirichlet_det(sd, n).value
        assert abs(t - d) <= 1e-12 * abs(t)
