"""Finite and Fredholm determinants.

Operators are handled as dense matrices; integral operators are discretised
by the Nystrom method on Gauss-Legendre nodes and the quadrature order is
doubled until the determinant settles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, lu_factor, norm as _norm

from .errors import NumericalFailure, ValidationError
from .quadrature import gauss_legendre

EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense discretisation of an operator.

    With ``symmetrized`` the entries are w_i^{1/2} K(x_i, x_j) w_j^{1/2};
    otherwise the weights sit on the columns.
    """

    matrix: np.ndarray
    nodes: np.ndarray | None = None
    weights: np.ndarray | None = None
    symmetrized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("operator matrix must be square")
        object.__setattr__(self, "matrix", a)
        if self.symmetrized:
            if self.weights is None or self.nodes is None:
                raise ValidationError("symmetrized matrix needs its nodes and weights")
            if np.any(np.asarray(self.weights) <= 0):
                raise ValidationError("quadrature weights must be positive")
            if np.any(np.diff(np.asarray(self.nodes)) <= 0):
                raise ValidationError("quadrature nodes must be increasing")

    @property
    def size(self):
        return self.matrix.shape[0]

    @classmethod
    def from_kernel(cls, kernel, x, w, symmetrize=True, **meta):
        k = kernel(x[:, None], x[None, :])
        if symmetrize:
            sw = np.sqrt(w)
            return cls(sw[:, None] * k * sw[None, :], x, w, True, meta)
        return cls(k * w[None, :], x, w, False, meta)


@dataclass(frozen=True)
class DetResult:
    value: complex
    err_est: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def rel_err(self):
        return self.err_est / abs(self.value) if self.value != 0 else math.inf


def _as_matrix(A):
    a = A.matrix if isinstance(A, OperatorMatrix) else np.asarray(A)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("determinant needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def lu_det(B):
    """(det B, reciprocal 1-norm condition estimate) from a pivoted LU."""
    B = np.asarray(B, dtype=complex)
    m = B.shape[0]
    if m == 0:
        return 1.0 + 0j, 1.0
    lu, piv = lu_factor(B, check_finite=False)
    d = np.diag(lu)
    sign = -1.0 if np.count_nonzero(piv != np.arange(m)) % 2 else 1.0
    # product via logs to avoid spurious under/overflow
    if np.any(d == 0):
        return 0j, 0.0
    val = sign * np.exp(np.sum(np.log(d)))
    anorm = np.abs(B).sum(axis=0).max()
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    return complex(val), float(rcond) if info == 0 else 0.0


def det_finite(A) -> DetResult:
    """det(I + A) by pivoted LU; the error estimate is eps * M / rcond."""
    a = _as_matrix(A)
    m = a.shape[0]
    val, rcond = lu_det(np.eye(m) + a)
    cond = 1.0 / rcond if rcond > 0 else math.inf
    err = abs(val) * EPS * max(m, 1) * cond if math.isfinite(cond) else math.inf
    return DetResult(val, err, {"M": m, "cond": cond})


def _fro(a):
    # BLAS nrm2 on the flattened array is scaled, so entries near 1e-200 do
    # not underflow when squared (the 2-D norm routines do)
    return float(_norm(np.ravel(a))) if np.size(a) else 0.0


def logdet_series(A, tol=1e-17, max_terms=400):
    """log det(I + A) = sum_k (-1)^{k+1} tr(A^k)/k for small A.

    Accurate in absolute terms even when det(I + A) - 1 is far below
    machine epsilon.  Needs spectral radius well below 1; raises otherwise.
    """
    a = _as_matrix(A).astype(complex)
    # Frobenius norm: |tr A^k| <= |A|_F^k bounds every term
    nrm = _fro(a)
    if nrm == 0:
        return 0j
    if nrm > 0.5:
        raise NumericalFailure("trace series needs |A|_F <= 1/2")
    total = 0j
    p = a.copy()
    for k in range(1, max_terms + 1):
        term = np.trace(p) / k
        total += term if k % 2 else -term
        if nrm**k / k < tol * max(abs(total), 1e-300) or nrm**k < 1e-300:
            break
        p = p @ a
    return total


def logdet(A, series_cap=512):
    """log det(I + A); small matrices of small norm use the trace series,
    which keeps det - 1 accurate below machine epsilon."""
    a = _as_matrix(A)
    if 0 < a.shape[0] <= series_cap and _fro(a) <= 0.25:
        return logdet_series(a)
    val, _ = lu_det(np.eye(a.shape[0]) + a)
    if val == 0:
        return -math.inf + 0j
    return complex(np.log(val))


def _nystrom_matrix(kernel, x, w, symmetric):
    k = kernel(x[:, None], x[None, :])
    if symmetric:
        sw = np.sqrt(w)
        return sw[:, None] * k * sw[None, :]
    return k * w[None, :]


def nystrom_det(kernel, interval, q=32, tol=1e-12, q_max=2048, symmetric=False) -> DetResult:
    """det(I + K) for a continuous kernel K(x, y) on an interval.

    ``kernel`` is vectorised over broadcast arrays.  The Gauss-Legendre order
    is doubled from ``q`` until successive values differ by less than
    ``tol * max(1, |det|)``.
    """
    lo, hi = map(float, interval)
    if not hi > lo:
        raise ValidationError("interval must have positive length")
    q = int(q)
    if q < 4:
        raise ValidationError("quadrature order must be at least 4")
    prev = None
    history = []
    while q <= q_max:
        x, w = gauss_legendre(q, lo, hi)
        cur = det_finite(_nystrom_matrix(kernel, x, w, symmetric))
        history.append((q, cur.value))
        if prev is not None:
            delta = abs(cur.value - prev.value)
            if delta < tol * max(1.0, abs(cur.value)):
                diag = {"q": q, "doubling_delta": delta, "cond": cur.diagnostics["cond"], "history": history}
                return DetResult(cur.value, max(delta, cur.err_est), diag)
        prev = cur
        q *= 2
    raise NumericalFailure(f"Nystrom determinant not converged at order {q // 2}", best=prev)


def sine_mult_det(f, q=64, tol=1e-12, q_max=2048) -> DetResult:
    """det(I + (e^f - 1) Pi) on the support of f, Pi the sine kernel.

    This is the expectation of prod_x e^{f(x)} over the sine process.
    """
    from .symbols import line_support

    lo, hi = line_support(f)
    if hi <= lo:
        return DetResult(1.0 + 0j, 0.0, {"q": 0})

    def kernel(x, y):
        return np.expm1(f.evaluate(x.ravel())).reshape(x.shape) * np.sinc(x - y)

    if np.all(np.asarray(f.evaluate(np.linspace(lo, hi, 65))) == 0):
        return DetResult(1.0 + 0j, 0.0, {"q": 0})
    return nystrom_det(kernel, (lo, hi), q, tol, q_max, symmetric=False)
