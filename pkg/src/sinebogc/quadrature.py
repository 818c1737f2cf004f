"""Quadrature rules used throughout: Gauss-Legendre on intervals, graded
panels on half-lines, the tangent map, Gauss-Laguerre legs and Gregory's
end-corrected trapezoid rule."""

from functools import lru_cache

import numpy as np
from numpy.polynomial.laguerre import laggauss
from scipy.special import roots_legendre


@lru_cache(maxsize=64)
def _legendre(q):
    x, w = roots_legendre(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def _laguerre(q):
    x, w = laggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(q, lo=-1.0, hi=1.0):
    """Nodes and weights of the q-point Gauss-Legendre rule on [lo, hi]."""
    if q < 1:
        raise ValueError("quadrature order must be positive")
    x, w = _legendre(int(q))
    half = 0.5 * (hi - lo)
    return half * x + 0.5 * (hi + lo), half * w


def gauss_laguerre(q):
    """Nodes/weights for the integral of phi(t) exp(-t) over (0, inf)."""
    return _laguerre(int(q))


def composite_legendre(edges, p):
    """p-point Gauss-Legendre on each panel [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly increasing")
    x, w = _legendre(int(p))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (half[:, None] * x[None, :] + mid[:, None]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_edges(first, stop, ratio=2.0):
    """Panel edges 0, first, first*ratio, ... capped at ``stop``.

    Geometric grading resolves kernels that vary fastest near the origin of
    a half-line and decay slowly further out.
    """
    if first <= 0 or stop <= 0:
        raise ValueError("panel lengths must be positive")
    edges = [0.0]
    e = min(first, stop)
    while e < stop * (1 - 1e-12):
        edges.append(e)
        e *= ratio
    edges.append(float(stop))
    return np.array(edges)


def tangent_map(q, shift=0.0, scale=1.0):
    """Map Gauss-Legendre nodes on [0, 1) to (shift, inf) by
    s = shift + scale * tan(pi xi / 2)."""
    xi, w = gauss_legendre(q, 0.0, 1.0)
    s = shift + scale * np.tan(0.5 * np.pi * xi)
    ws = w * scale * 0.5 * np.pi / np.cos(0.5 * np.pi * xi) ** 2
    return s, ws


# Gregory coefficients c_d; the rule subtracts
# h * c_d * (nabla^d f_n + (-1)^d Delta^d f_0) from the trapezoid sum.
_GREGORY = (1 / 12, 1 / 24, 19 / 720, 3 / 160, 863 / 60480, 275 / 24192)


def gregory(values, h, order=6):
    """Integral of equispaced samples by the trapezoid rule with Gregory end
    corrections up to ``order`` differences.  Exact for polynomials of
    degree <= order on grids with enough points."""
    y = np.asarray(values)
    n = y.size
    if n < 2:
        return 0.0 * h
    total = h * (y.sum() - 0.5 * (y[0] + y[-1]))
    order = min(order, len(_GREGORY), (n - 1) // 2)
    fwd = y[: order + 1]
    rev = y[::-1][: order + 1]
    for d in range(1, order + 1):
        fwd = np.diff(fwd)
        rev = np.diff(rev)
        # np.diff^d of the reversed samples is (-1)^d nabla^d f_n
        sign = -1.0 if d % 2 else 1.0
        total = total - h * _GREGORY[d - 1] * sign * (rev[0] + fwd[0])
    return total
