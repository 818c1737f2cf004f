"""Hankel matrices and continual Hankel operators.

Discrete:   H(S)_{ij} = S^(i + j - 1), i, j >= 1.
Continual:  Ha(r) phi(s) = (1/2pi) int_0^inf r^(s + t) phi(t) dt.

The finite-n identity for Toeplitz determinants reads

    D_n(e^F) = exp(sum_{k>0} k F^(k) F^(-k)) det(1 - chi H(N) H(~N^{-1}) chi),

chi the restriction to indices > n and N = exp(F_- - F_+).  Only indices
>= 1 of a symbol enter a Hankel matrix, so the mean of N or of h plays no
role and transforms are taken of h - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .errors import NumericalFailure, ValidationError
from .fredholm import DetResult, OperatorMatrix, _fro, logdet
from .quadrature import composite_legendre, graded_edges, tangent_map
from .symbols import (LineDerived, SpectralData, TorusDerived, build_N, line_transform, require_zero_mean,
                      szego_exponent)

TWO_PI = 2.0 * math.pi
M_CAP = 4096


@dataclass(frozen=True, eq=False)
class HankelBlock:
    """Entries S^(offset + i + j - 1) over an M-by-M window, with the
    Hilbert-Schmidt norm ``tau`` of everything outside the window."""

    matrix: np.ndarray
    row_offset: int
    col_offset: int
    tau: float
    meta: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.matrix.shape[0]

    @property
    def hs_norm(self):
        return _fro(self.matrix)


def hankel_discrete(sd: SpectralData, m: int, M: int, col_offset: int | None = None, tail=None) -> HankelBlock:
    """Block of H(S) with rows m+1..m+M and columns c+1..c+M (c = m by default).

    ``tail(k0, shift)`` may bound sum_{k >= k0} (k - shift)|S^(k)|^2 beyond
    the stored range; without it the unknown part counts as infinite unless
    the stored data already vanish there.
    """
    if sd.domain != "torus":
        raise ValidationError("discrete Hankel blocks need circle coefficients")
    m, M = int(m), int(M)
    c = m if col_offset is None else int(col_offset)
    if m < 0 or c < 0 or M < 1:
        raise ValidationError("offsets must be >= 0 and size >= 1")
    s = m + c
    top = s + 2 * M - 1
    if sd.K_max < top:
        raise ValidationError(f"block needs coefficients up to index {top}, have {sd.K_max}")
    i = np.arange(1, M + 1)
    A = sd.coeff(s + i[:, None] + i[None, :] - 1)
    # entries left out: index k >= s + M + 1 appears (k - s) times in the full
    # quarter-plane, at most; known ones are summed, the rest bounded
    k = np.arange(s + M + 1, sd.K_max + 1)
    known = float(np.sum((k - s) * np.abs(sd.coeff(k)) ** 2)) if k.size else 0.0
    if tail is not None:
        rest = tail(sd.K_max + 1, s)
    else:
        rest = math.inf
        if sd.meta.get("exact") and sd.source is not None and hasattr(sd.source, "degree") \
                and sd.source.degree <= sd.K_max:
            rest = 0.0
    tau = math.sqrt(known + rest) if math.isfinite(rest) else math.inf
    return HankelBlock(A, m, c, tau, {"top_index": top})


def gauge_conjugate(A):
    """D A D with D = diag((-1)^i); leaves determinants unchanged."""
    A = np.asarray(A)
    d = (-1.0) ** np.arange(A.shape[0])
    return d[:, None] * A * d[None, :]


# ---------------------------------------------------------------------------
# finite-n identity


def _bogc_blocks(derived: TorusDerived, n, M):
    tail_a = lambda k0, s: derived.tail_bound("N", k0, s)  # noqa: E731
    tail_b = lambda k0, s: derived.tail_bound("Ninv", k0, s)  # noqa: E731
    A = hankel_discrete(derived.N, n, M, col_offset=0, tail=tail_a)
    B = hankel_discrete(derived.N_inv_reflected, 0, M, col_offset=n, tail=tail_b)
    return A, B


def _det_error_bound(A: HankelBlock, B: HankelBlock):
    """|det(1 - AB) - det(1 - A_M B_M)| <= |X - Y|_1 exp(1 + |X|_1 + |Y|_1)."""
    a, b = A.hs_norm, B.hs_norm
    ta, tb = A.tau, B.tau
    if not (math.isfinite(ta) and math.isfinite(tb)):
        return math.inf
    delta = (a + ta) * tb + ta * b
    return delta * math.exp(1 + a * b + (a + ta) * (b + tb))


def _tail_only_bound(derived, n, M, a, b):
    """Same bound with the kept-block norms frozen at a, b (M estimate)."""
    ta = math.sqrt(derived.tail_bound("N", n + M + 1, n))
    tb = math.sqrt(derived.tail_bound("Ninv", n + M + 1, n))
    delta = (a + ta) * tb + ta * b
    return delta * math.exp(1 + a * b + (a + ta) * (b + tb))


def _log10_det_minus_one(A, B, ld):
    """log10 |det(1 - AB) - 1|, also when the value underflows.

    For |det - 1| < 1e-100 it equals -tr(AB) up to a relative O(|AB|), and
    the trace is taken with A and B scaled to unit size."""
    if abs(ld) > 1e-100:
        return math.log10(abs(np.expm1(ld)))
    sa, sb = float(np.abs(A).max(initial=0.0)), float(np.abs(B).max(initial=0.0))
    if sa == 0 or sb == 0:
        return -math.inf
    t = abs(np.sum((A / sa) * (B / sb).T))
    return math.log10(t) + math.log10(sa) + math.log10(sb) if t > 0 else -math.inf


def bogc_rhs(F: SpectralData, n: int, M: int | None = None, tol=1e-12, derived: TorusDerived | None = None,
             M_cap=M_CAP) -> DetResult:
    """exp(<F_+, F_->) det(1 - chi_{>n} H(N) H(~N^{-1}) chi_{>n}) with an
    M-by-M truncation and a certified bound on the truncation error."""
    require_zero_mean(F)
    n = int(n)
    if n < 0:
        raise ValidationError("n must be >= 0")
    pref = complex(np.exp(szego_exponent(F)))

    def at(MM, der):
        if der is None or der.N.K_max < n + 2 * MM:
            der = build_N(F, n + 2 * MM + 1)
        A, B = _bogc_blocks(der, n, MM)
        return A, B, _det_error_bound(A, B), der

    auto = M is None
    MM = int(M) if M else 8
    A, B, bound, derived = at(MM, derived)
    while auto and bound >= tol and 2 * MM <= M_cap:
        MM *= 2
        A, B, bound, derived = at(MM, derived)
    if bound >= tol:
        est = MM
        while est <= 64 * M_cap and _tail_only_bound(derived, n, est, A.hs_norm, B.hs_norm) >= tol:
            est *= 2
        need = f"about {est}" if est <= 64 * M_cap else "beyond reach of the coefficient bounds"
        raise NumericalFailure(f"truncation bound {bound:.2e} >= {tol:.0e} at M={MM}; required M {need}")
    X = A.matrix @ B.matrix
    ld = logdet(-X)
    factor = complex(np.exp(ld))
    value = pref * factor
    rnd = abs(value) * 1e-15 * MM
    diag = {"M": MM, "tau_N": A.tau, "tau_Ninv": B.tau, "tail_bound": bound, "prefactor": pref,
            "det_factor": factor, "det_minus_one": complex(np.expm1(ld)), "log_det": ld,
            "log10_abs_det_minus_one": _log10_det_minus_one(A.matrix, B.matrix, ld)}
    return DetResult(value, abs(pref) * bound + rnd, diag)


# ---------------------------------------------------------------------------
# continual Hankel operators on half-lines


@dataclass(frozen=True)
class HalfLineQuad:
    """Quadrature on (0, inf): graded Gauss-Legendre panels (default) or the
    tangent map."""

    order: int = 10
    first: float = 0.25
    ratio: float = 2.0
    max_width: float = 2.0
    kind: str = "panels"
    table_width: float = 1.0
    cut_rel: float = 1e-10

    def nodes(self, stop):
        if self.kind == "tan":
            x, w = tangent_map(self.order * 8, 0.0, 1.0)
            keep = x < stop
            return x[keep], w[keep]
        if self.kind != "panels":
            raise ValidationError(f"unknown half-line quadrature {self.kind!r}")
        edges = graded_edges(self.first, stop, self.ratio)
        # split long panels so none is wider than max_width
        fine = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            k = max(1, int(math.ceil((b - a) / self.max_width)))
            fine.extend(a + (b - a) * np.arange(1, k + 1) / k)
        return composite_legendre(np.array(fine), self.order)

    def refined(self):
        return HalfLineQuad(2 * self.order, self.first, self.ratio, self.max_width, self.kind, self.table_width,
                            self.cut_rel)


class PanelChebyshev:
    """Piecewise Chebyshev interpolant of a function on [lo, hi], zero outside.

    Panels are at most ``width`` long and no longer than half their distance
    from the origin, so a singularity at 0 stays outside each panel's
    Bernstein ellipse.
    """

    def __init__(self, fun, lo, hi, width=2.0, degree=24):
        edges = [float(lo)]
        while edges[-1] < hi:
            e = edges[-1]
            edges.append(min(hi, e + min(width, max(0.5 * e, 1e-3))))
        self.edges = np.array(edges)
        n = int(degree)
        x = np.cos(math.pi * (np.arange(n) + 0.5) / n)
        a, b = self.edges[:-1, None], self.edges[1:, None]
        nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
        vals = np.asarray(fun(nodes.ravel())).reshape(nodes.shape)
        c = dct(vals.real, type=2, axis=1) / n + 1j * dct(vals.imag, type=2, axis=1) / n
        c[:, 0] *= 0.5
        self.coef = c
        self.lo, self.hi = float(lo), float(hi)
        self._peaks = np.abs(vals).max(axis=1)
        # size of the last coefficients, a proxy for the interpolation error
        self.err = float(np.abs(c[:, -2:]).sum(axis=1).max())

    def reach(self, rel):
        """Right end of the last panel where |values| exceed rel * peak."""
        top = self._peaks.max(initial=0.0)
        big = np.nonzero(self._peaks > rel * top)[0]
        return self.lo if big.size == 0 else float(self.edges[big[-1] + 1])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        inside = (flat >= self.lo) & (flat <= self.hi)
        v = flat[inside]
        p = np.clip(np.searchsorted(self.edges, v, side="right") - 1, 0, self.coef.shape[0] - 1)
        a, b = self.edges[p], self.edges[p + 1]
        x = (2 * v - a - b) / (b - a)
        c = self.coef
        b1 = np.zeros(v.shape, dtype=complex)
        b2 = np.zeros(v.shape, dtype=complex)
        for k in range(c.shape[1] - 1, 0, -1):
            b1, b2 = c[p, k] + 2 * x * b1 - b2, b1
        out[inside] = c[p, 0] + x * b1 - b2
        return out.reshape(u.shape)


def kernel_tables(h: LineDerived, scale=TWO_PI, offset=1.0, width=1.0):
    """Interpolants of (h-1)^ and (~h^{-1}-1)^ on [scale * offset, U_max]."""
    lo = float(scale) * offset
    return (PanelChebyshev(h.hhat, lo, h.U_max, width=width),
            PanelChebyshev(h.hinv_tilde_hat, lo, h.U_max, width=width))


def hankel_continual_product(h: LineDerived, quad: HalfLineQuad | None = None, scale=TWO_PI,
                             offset=1.0, cover_rel=1e-10, tables=None) -> OperatorMatrix:
    """Nystrom matrix of chi Ha(h(./L)) Ha(~h^{-1}(./L)) chi on (offset, inf).

    Kernels: (L/2pi) (h-1)^(L(s+t)) and (L/2pi) (~h^{-1}-1)^(L(t+u)),
    L = ``scale``.  Transforms vanish beyond h.U_max, which truncates both
    half-lines.  The matrix is returned symmetrised in the outer variable.
    """
    quad = quad or HalfLineQuad()
    L = float(scale)
    stop = h.U_max / L
    if stop <= offset:
        raise ValidationError("transform cutoff leaves nothing beyond the offset")
    peak, edge = _coverage(h)
    if edge > cover_rel * max(peak, 1e-300):
        raise NumericalFailure(f"transform of h - 1 not decayed at the cutoff ({edge:.1e} vs peak {peak:.1e})")
    fa, fb = tables or kernel_tables(h, L, offset, quad.table_width)
    # kernel entries beyond this reach are below cut_rel of the largest one
    stop = min(stop, max(fa.reach(quad.cut_rel), fb.reach(quad.cut_rel)) / L)
    tau, wt = quad.nodes(max(stop - offset, 1e-3) if stop > offset else 1e-3)
    s = offset + tau
    c = L / TWO_PI
    arg = s[:, None] + tau[None, :]
    A = c * fa(L * arg)
    B = c * fb(L * arg.T)
    sw = np.sqrt(wt)
    At = sw[:, None] * A * sw[None, :]
    Bt = sw[:, None] * B * sw[None, :]
    K = At @ Bt
    return OperatorMatrix(K, s, wt, True, {"order": quad.order, "nodes": s.size, "stop": stop, "scale": L,
                                           "factors": (At, Bt), "table_err": max(fa.err, fb.err)})


def _coverage(h: LineDerived):
    u = np.linspace(0.0, h.U_max * (1 - 1e-9), 2049)[1:]
    v = np.abs(h.hhat_centered(u))
    w = np.abs(h.hinv_hat_centered(-u))
    peak = float(max(v.max(), w.max()))
    tail = slice(-64, None)
    return peak, float(max(v[tail].max(), w[tail].max()))


def continual_det(h: LineDerived, quad: HalfLineQuad | None = None, scale=TWO_PI, offset=1.0, tol=1e-10,
                  max_order=64) -> DetResult:
    """det(1 - K) for the product above, doubling the panel order until two
    successive values agree to ``tol``."""
    quad = quad or HalfLineQuad()
    tables = kernel_tables(h, scale, offset, quad.table_width)
    history = []
    prev = None
    while quad.order <= max_order:
        K = hankel_continual_product(h, quad, scale, offset, tables=tables)
        val = complex(np.exp(logdet(-K.matrix)))
        history.append((quad.order, K.size, val))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return DetResult(val, abs(val - prev), {"order": quad.order, "nodes": K.size,
                                                    "doubling_delta": abs(val - prev), "history": history})
        prev = val
        quad = quad.refined()
    raise NumericalFailure("continual determinant not settled under order doubling", best=prev)


# ---------------------------------------------------------------------------
# exterior-power traces


@dataclass(frozen=True)
class TraceResult:
    """tr Lambda^l of a Hankel operator via Newton's identities from the
    power traces p_k = tr H^k."""

    l: int
    value: complex
    power_traces: tuple
    bound: float
    err_est: float
    meta: dict = field(default_factory=dict)

    @property
    def within_bound(self):
        return abs(self.value) <= self.bound * (1 + 1e-12) + self.err_est


def elementary_from_power(p, l):
    """e_l from p_1..p_l.  e_1 = p1, e_2 = (p1^2 - p2)/2, ..."""
    e = [1.0 + 0j]
    for k in range(1, l + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e.append(acc / k)
    return e[l]


def _check_l(l):
    if l not in (1, 2, 3):
        raise ValidationError("exterior power degree must be 1, 2 or 3")


def exterior_trace_discrete(R: SpectralData, l: int, M: int | None = None, dense_cap=2048) -> TraceResult:
    """tr Lambda^l of the M-by-M block of H(R), H(R)_{ij} = R^(i + j - 1).

    p_1 and p_2 are closed sums over anti-diagonals; p_3 uses the dense block
    (at most ``dense_cap`` rows).  Coefficients beyond the stored range count
    as zero; the default M covers all of them.
    """
    _check_l(l)
    if R.domain != "torus":
        raise ValidationError("discrete traces need circle coefficients")
    K = R.K_max
    M = K if M is None else int(M)
    if l == 3:
        M = min(M, dense_cap)
    kk = np.arange(1, K + 1)
    c = R.coeff(kk)
    # index k occupies min(k, 2M - k) cells of the block
    mult = np.clip(np.minimum(kk, 2 * M - kk), 0, None)
    p = [complex(c[(kk % 2 == 1) & (kk <= 2 * M - 1)].sum()), complex(np.sum(mult * c * c))]
    if l == 3:
        i = np.arange(1, M + 1)
        idx = i[:, None] + i[None, :] - 1
        H = np.where(idx <= K, R.coeff(np.minimum(idx, K)), 0)
        p.append(complex(np.sum((H @ H) * H.T)))
    val = elementary_from_power(p, l)
    l1 = float(np.abs(c).sum())
    # trace norm of the part outside the block: anti-diagonal k has norm <= k
    drop = float(np.sum((kk - mult) * np.abs(c)))
    hn = float(np.sum(kk * np.abs(c)))
    err = drop * (hn + drop) ** (l - 1) / math.factorial(l - 1) + 1e-15 * max(hn, 1.0) ** l
    return TraceResult(l, val, tuple(p[:l]), l1**l / math.factorial(l), err,
                       {"K": K, "M": M, "l1": l1, "last_coeff": float(abs(c[-1]))})


def _line_r_hat(r: SpectralData):
    if r.domain != "line" or r.source is None:
        raise ValidationError("continual traces need line data with its source symbol")
    return lambda u: np.where(np.abs(u) <= r.U_max, line_transform(r.source, u), 0)


def exterior_trace_continual(r: SpectralData, l: int, quad: HalfLineQuad | None = None, tol=1e-10,
                             max_order=64) -> TraceResult:
    """tr Lambda^l Ha(r), kernel (1/2pi) r^(s + t) on (0, inf).

    p_1 = (1/4pi) int_0^inf r^(v) dv and p_2 = (1/4pi^2) int_0^inf v r^(v)^2 dv
    by 1-D panels; p_3 by a Nystrom matrix.  Orders double until stable.
    """
    _check_l(l)
    rh = _line_r_hat(r)
    stop = r.U_max
    quad = quad or HalfLineQuad(order=16, first=0.25, max_width=4.0)
    table = PanelChebyshev(rh, 0.0, stop) if l >= 3 else None

    def once(qd):
        v, wv = qd.nodes(stop)
        rv = rh(v)
        p1 = complex((wv * rv).sum() / (4 * math.pi))
        p2 = complex((wv * v * rv * rv).sum() / (4 * math.pi**2))
        p = [p1, p2]
        l1 = float((wv * np.abs(rv)).sum())
        if l >= 3:
            t, wt = qd.nodes(min(stop, table.reach(qd.cut_rel)) / 2)
            sw = np.sqrt(wt)
            H = sw[:, None] * table(t[:, None] + t[None, :]) * sw[None, :] / TWO_PI
            p.append(complex(np.sum((H @ H) * H.T)))
        return p, l1

    prev = None
    while quad.order <= max_order:
        p, l1 = once(quad)
        val = elementary_from_power(p, l)
        if prev is not None and abs(val - prev[0]) <= tol * max(1.0, abs(val)):
            bound = (l1 / TWO_PI) ** l / math.factorial(l)
            return TraceResult(l, val, tuple(p[:l]), bound, abs(val - prev[0]), {"order": quad.order, "l1": l1})
        prev = (val, p)
        quad = quad.refined()
    raise NumericalFailure("continual trace not settled under order doubling", best=prev[0] if prev else None)
