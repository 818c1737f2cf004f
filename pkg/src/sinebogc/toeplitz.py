"""Toeplitz determinants D_n and their Fredholm form with the Dirichlet kernel."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import toeplitz

from .errors import ValidationError
from .fredholm import EPS, DetResult, lu_det
from .symbols import SpectralData, grid_values_torus, torus_grid


def _need(sd: SpectralData, n):
    if sd.domain != "torus":
        raise ValidationError("Toeplitz matrices need circle coefficients")
    if n < 1:
        raise ValidationError("matrix order must be positive")
    if sd.K_max < n - 1:
        raise ValidationError(f"order {n} needs coefficients for |k| <= {n - 1}, have |k| <= {sd.K_max}")


def toeplitz_matrix(sd: SpectralData, n: int) -> np.ndarray:
    """T_ij = F^(i - j), i, j = 1..n."""
    _need(sd, n)
    k = np.arange(n)
    return toeplitz(sd.coeff(k), sd.coeff(-k))


def toeplitz_det(sd: SpectralData, n: int) -> DetResult:
    """D_n = det T_n(F) by pivoted LU."""
    T = toeplitz_matrix(sd, n)
    val, rcond = lu_det(T)
    cond = 1.0 / rcond if rcond > 0 else math.inf
    err = abs(val) * EPS * n * cond if math.isfinite(cond) else math.inf
    return DetResult(val, err, {"n": n, "cond": cond})


def dirichlet_kernel(n, d):
    """sum_{k=0}^{n-1} e^{ik d}, with value n at d = 0."""
    d = np.asarray(d, dtype=float)
    half = 0.5 * d
    s = np.sin(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.where(np.abs(s) > 1e-300, np.sin(n * half) / s, n * np.cos(n * half) / np.cos(half))
    return np.exp(1j * (n - 1) * half) * core


def dirichlet_det(sd: SpectralData, n: int, quad_points: int | None = None) -> DetResult:
    """det(1 + (G - 1) K_n) on the circle, K_n the rank-n projection onto the
    modes 0..n-1, discretised on a uniform grid with weight 1/Q."""
    if sd.domain != "torus":
        raise ValidationError("Dirichlet form needs circle coefficients")
    Q = int(quad_points or 4 * n)
    if Q < 4 * n:
        raise ValidationError("need at least 4n grid points")
    # no aliasing of the coefficients the n x n compression sees
    Q = max(Q, n + sd.K_max + 1)
    theta = torus_grid(Q)
    G = grid_values_torus(sd, Q)
    A = (G - 1)[:, None] * dirichlet_kernel(n, theta[:, None] - theta[None, :]) / Q
    val, rcond = lu_det(np.eye(Q) + A)
    cond = 1.0 / rcond if rcond > 0 else math.inf
    err = abs(val) * EPS * Q * cond if math.isfinite(cond) else math.inf
    return DetResult(val, err, {"n": n, "Q": Q, "rank": n, "cond": cond})
