"""The sine process: kernel, linear statistics, exact sampling on a window,
Monte Carlo estimates and the Hankel-operator form of E exp(S_f - E S_f)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import sici

from .errors import NumericalFailure, ValidationError
from .fredholm import DetResult
from .hankel import HalfLineQuad, continual_det
from .quadrature import composite_legendre, gauss_legendre
from .symbols import build_h, fourier_line, line_support, line_szego_exponent, line_transform

TWO_PI = 2.0 * math.pi
DEFAULT_PAD = 2.0
EIG_DROP = 1e-12
BATCH = 1024


def sine_kernel(x, y):
    """sin(pi(x - y)) / (pi(x - y)), equal to 1 on the diagonal."""
    return np.sinc(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


def mean_S(f) -> complex:
    """E S_f = int f, the one-point density being 1."""
    lo, hi = line_support(f)
    if hi <= lo:
        return 0j
    return complex(line_transform(f, np.zeros(1))[0])


# ---------------------------------------------------------------------------
# variance of a linear statistic


def _sinc2_primitive(t):
    """int_0^t sinc(s)^2 ds = Si(2 pi t)/pi - sin(pi t)^2/(pi^2 t)."""
    t = np.asarray(t, dtype=float)
    si, _ = sici(TWO_PI * t)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(t != 0, np.sin(math.pi * t) ** 2 / (math.pi**2 * t), 0.0)
    return si / math.pi - corr


def _variance_box(f, lo, hi, q):
    x, w = gauss_legendre(q, lo, hi)
    fx = f.evaluate(x)
    diff = np.abs(fx[:, None] - fx[None, :]) ** 2
    inner = 0.5 * np.einsum("i,ij,j->", w, diff * sine_kernel(x[:, None], x[None, :]) ** 2, w)
    # mass of Pi(x, .)^2 outside the box, where f vanishes
    outside = 1.0 - (_sinc2_primitive(x - lo) - _sinc2_primitive(x - hi))
    return float(inner + np.sum(w * np.abs(fx) ** 2 * outside))


def variance_S(f, pad_step=1.0, max_pad=16.0, tol=1e-12, q0=64, shell_rel=1e-8) -> float:
    """Var S_f = (1/2) int int |f(x) - f(y)|^2 Pi(x, y)^2 dx dy for real f.

    The double integral runs over the padded support; the part with one
    variable outside the box is integrated in closed form there.  Padding
    grows until the added shell changes the value by < ``shell_rel``.
    """
    if not f.is_real:
        raise ValidationError("variance formula is for real f")
    lo, hi = line_support(f)

    def settled(pad):
        q, prev = q0, None
        while q <= 4096:
            v = _variance_box(f, lo - pad, hi + pad, q)
            if prev is not None and abs(v - prev) <= tol * max(abs(v), 1e-300):
                return v
            prev, q = v, 2 * q
        raise NumericalFailure("variance quadrature did not settle", best=prev)

    pad, val = 0.0, settled(0.0)
    while pad < max_pad:
        nxt = settled(pad + pad_step)
        if abs(nxt - val) <= shell_rel * max(abs(val), 1e-300):
            return nxt
        pad, val = pad + pad_step, nxt
    raise NumericalFailure("variance padding did not converge", best=val)


def variance_spectral(f, U_max=None) -> float:
    """(1/4pi^2) int min(|u|, 2 pi) |f^(u)|^2 du."""
    from .symbols import default_umax

    U = float(U_max or default_umax(f))
    edges = np.concatenate([np.linspace(0, TWO_PI, 5), np.geomspace(TWO_PI, max(U, 2 * TWO_PI), 40)[1:]])
    u, w = composite_legendre(edges, 24)
    a2 = np.abs(line_transform(f, u)) ** 2 + np.abs(line_transform(f, -u)) ** 2
    return float(np.sum(w * np.minimum(u, TWO_PI) * a2) / (4 * math.pi**2))


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True, eq=False)
class Configuration:
    points: np.ndarray
    window: tuple

    def __post_init__(self):
        p = np.sort(np.asarray(self.points, dtype=float))
        lo, hi = self.window
        if p.size and (p[0] < lo or p[-1] > hi):
            raise ValidationError("configuration points leave the window")
        if np.any(np.diff(p) <= 0):
            raise ValidationError("configuration points must be distinct")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.size

    def to_csv(self):
        return "x\n" + "".join(f"{x:.17g}\n" for x in self.points)


@dataclass(frozen=True)
class MCEstimate:
    mean: complex
    stderr: float
    N: int
    window: tuple
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"mean": [self.mean.real, self.mean.imag], "stderr": self.stderr, "N": self.N,
                "window": list(self.window), **self.extra}


class WindowSampler:
    """Exact sampler of the sine process restricted to a window.

    The restricted kernel is diagonalised by the Nystrom method; each sample
    keeps eigenfunction k with probability lambda_k and then draws points
    sequentially from the resulting projection process.  Sequential densities
    are tabulated on ``grid`` points and sampled exactly as piecewise-linear
    densities; eigenfunction values at drawn points are exact Nystrom
    interpolants.
    """

    def __init__(self, window, q=None, grid=2049):
        lo, hi = map(float, window)
        if not hi > lo:
            raise ValidationError("window must have positive length")
        if hi - lo > 64:
            raise ValidationError("window longer than 64 units")
        self.window = (lo, hi)
        q = int(q or max(64, 12 * (hi - lo) + 48))
        x, w = gauss_legendre(q, lo, hi)
        sw = np.sqrt(w)
        lam, V = np.linalg.eigh(sw[:, None] * sine_kernel(x[:, None], x[None, :]) * sw[None, :])
        if lam.min() < -1e-8 or lam.max() > 1 + 1e-8:
            raise NumericalFailure(f"restricted kernel eigenvalue {lam.min():.2e}/{lam.max():.2e} outside [0, 1]")
        lam = np.clip(lam, 0.0, 1.0)
        keep = lam >= EIG_DROP
        self.dropped_mass = float(lam[~keep].sum())
        self.lam = lam[keep][::-1].copy()
        # phi_k(x_j) = V_jk / sqrt(w_j); Nystrom: phi_k(x) = sum_j Pi(x, x_j) w_j phi_k(x_j) / lambda_k
        self._x = x
        self._coef = (V[:, keep][:, ::-1] * sw[:, None]) / self.lam[None, :]
        self.q = q
        self.grid = np.linspace(lo, hi, int(grid))
        self._phi_grid = self.phi(self.grid)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        return sine_kernel(x.ravel()[:, None], self._x[None, :]) @ self._coef

    def _draw(self, rng, n):
        """Point sets for n samples, grouped by size: {m: array (count, m)}
        together with the sample order."""
        sel = rng.random((n, self.lam.size)) < self.lam[None, :]
        sizes = sel.sum(axis=1)
        out = {}
        for m in np.unique(sizes):
            idx = np.nonzero(sizes == m)[0]
            if m == 0:
                out[0] = (idx, np.zeros((idx.size, 0)))
                continue
            cols = np.array([np.nonzero(sel[i])[0] for i in idx])
            out[int(m)] = (idx, self._sequential(rng, cols))
        return out

    def _sequential(self, rng, cols):
        """Sequential projection-process draws for a block of samples whose
        selected eigenfunction indices are the rows of ``cols``."""
        B, m = cols.shape
        G = self.grid
        h = G[1] - G[0]
        Phi = self._phi_grid[:, cols].transpose(1, 0, 2)  # (B, G, m)
        resid = np.einsum("bgm,bgm->bg", Phi, Phi)
        basis = np.zeros((B, m, m))
        pts = np.empty((B, m))
        for i in range(m):
            dens = np.clip(resid, 0.0, None)
            cell = 0.5 * h * (dens[:, 1:] + dens[:, :-1])
            cdf = np.cumsum(cell, axis=1)
            r = rng.random(B) * cdf[:, -1]
            k = np.minimum((cdf < r[:, None]).sum(axis=1), cell.shape[1] - 1)
            before = np.where(k > 0, cdf[np.arange(B), k - 1], 0.0)
            rem = r - before
            d0 = dens[np.arange(B), k]
            d1 = dens[np.arange(B), k + 1]
            slope = (d1 - d0) / h
            # solve d0 t + slope t^2 / 2 = rem on [0, h]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_lin = np.where(d0 > 0, rem / d0, 0.5 * h)
                disc = np.sqrt(np.maximum(d0 * d0 + 2 * slope * rem, 0.0))
                t_quad = np.where(np.abs(slope) > 1e-14 * np.maximum(d0, 1e-300), 2 * rem / (d0 + disc), t_lin)
            t = np.clip(t_quad, 0.0, h)
            x = G[k] + t
            pts[:, i] = x
            v = self.phi(x)[np.arange(B)[:, None], cols]  # (B, m)
            # Gram-Schmidt against the directions already used
            for j in range(i):
                v -= np.einsum("bm,bm->b", v, basis[:, j])[:, None] * basis[:, j]
            nv = np.linalg.norm(v, axis=1)
            if np.any(nv <= 0):
                raise NumericalFailure("degenerate sequential draw")
            e = v / nv[:, None]
            basis[:, i] = e
            resid = resid - np.einsum("bgm,bm->bg", Phi, e) ** 2
        return np.sort(pts, axis=1)

    def batches(self, N, seed):
        """Yield (point block dict) for consecutive batches of BATCH samples.

        Batch b uses its own stream spawned from SeedSequence(seed), so the
        samples depend only on (seed, N, window, q, grid).  Draws within a
        batch are vectorised, so changing N changes the last batch.
        """
        seqs = np.random.SeedSequence(int(seed)).spawn(int(math.ceil(N / BATCH)))
        done = 0
        for ss in seqs:
            n = min(BATCH, N - done)
            yield self._draw(np.random.default_rng(ss), n)
            done += n


def sample(window, seed, q=None, grid=2049) -> Configuration:
    """One configuration of the sine process on ``window``."""
    s = WindowSampler(window, q, grid)
    block = next(s.batches(1, seed))
    for _, (_, pts) in block.items():
        return Configuration(pts[0], s.window)
    return Configuration(np.zeros(0), s.window)


def sample_many(window, N, seed, q=None, grid=2049):
    """List of N configurations (sample order)."""
    s = WindowSampler(window, q, grid)
    out = []
    for block in s.batches(N, seed):
        rows = [None] * sum(idx.size for idx, _ in block.values())
        for _, (idx, pts) in block.items():
            for i, r in zip(idx, pts):
                rows[i] = Configuration(r, s.window)
        out.extend(rows)
    return out


def _window_for(f, window, pad):
    lo, hi = line_support(f)
    if window is None:
        return (lo - pad, hi + pad)
    wlo, whi = map(float, window)
    if wlo > lo - pad or whi < hi + pad:
        raise ValidationError(f"window must contain the support of f with {pad} units of padding")
    return (wlo, whi)


def _linear_stats(f, N, seed, window, q, grid):
    s = WindowSampler(window, q, grid)
    S = np.empty(N, dtype=complex)
    counts = np.empty(N, dtype=int)
    start = 0
    for block in s.batches(N, seed):
        n = sum(idx.size for idx, _ in block.values())
        for m, (idx, pts) in block.items():
            vals = f.evaluate(pts.ravel()).reshape(pts.shape) if m else np.zeros((idx.size, 0))
            S[start + idx] = vals.sum(axis=1)
            counts[start + idx] = m
        start += n
    return S, counts, s


def _stderr(z):
    z = np.asarray(z)
    if z.size < 2:
        return 0.0
    return float(np.sqrt(np.mean(np.abs(z - z.mean()) ** 2) / (z.size - 1)))


def mc_mult_expectation(f, N, seed, window=None, pad=DEFAULT_PAD, q=None, grid=2049) -> MCEstimate:
    """Monte Carlo estimate of E prod_x e^{f(x)} = E exp(S_f).

    ``extra`` carries the regularised estimate of E exp(S_f - int f).
    """
    N = int(N)
    if N < 1:
        raise ValidationError("need at least one sample")
    window = _window_for(f, window, pad)
    S, counts, s = _linear_stats(f, N, seed, window, q, grid)
    raw = np.exp(S)
    reg = np.exp(S - mean_S(f))
    m = complex(raw.mean())
    mr = complex(reg.mean())
    extra = {"regularized": [mr.real, mr.imag], "regularized_stderr": _stderr(reg),
             "mean_count": float(counts.mean()), "dropped_eigen_mass": s.dropped_mass}
    return MCEstimate(m, _stderr(raw), N, window, extra)


def mc_linear_variance(f, N, seed, window=None, pad=DEFAULT_PAD, q=None, grid=2049):
    """Sample variance of S_f and its standard error, sqrt((m4 - s^4)/N)."""
    window = _window_for(f, window, pad)
    S, counts, _ = _linear_stats(f, int(N), seed, window, q, grid)
    S = S.real
    c = S - S.mean()
    var = float(np.mean(c**2) * S.size / (S.size - 1))
    m4 = float(np.mean(c**4))
    se = math.sqrt(max(m4 - var**2, 0.0) / S.size)
    return var, se, float(counts.mean())


# ---------------------------------------------------------------------------
# Hankel-operator form


def _prefactor(f, du=None):
    sd = fourier_line(f, du)
    S = line_szego_exponent(sd)
    return S / (4 * math.pi**2), sd


def theorem_rhs(f, quad: HalfLineQuad | None = None, h=None, tol=1e-10) -> DetResult:
    """exp((1/4pi^2) int_0^inf u f^(u) f^(-u) du) *
    det(1 - chi_(1,inf) Ha(h(./2pi)) Ha(~h^{-1}(./2pi)) chi_(1,inf)),
    h = exp(f_- - f_+); equals E exp(S_f - int f) over the sine process."""
    lo, hi = line_support(f)
    if hi <= lo or np.all(f.evaluate(np.linspace(lo, hi, 65)) == 0):
        return DetResult(1.0 + 0j, 0.0, {"prefactor_exponent": 0j})
    expo, _ = _prefactor(f)
    h = h or build_h(f)
    det = continual_det(h, quad, scale=TWO_PI, offset=1.0, tol=tol)
    val = complex(np.exp(expo) * det.value)
    diag = dict(det.diagnostics, prefactor_exponent=expo, det=det.value, g_max=h.g_max)
    return DetResult(val, abs(np.exp(expo)) * det.err_est, diag)


def lemma_rhs(r, quad: HalfLineQuad | None = None, h=None, tol=1e-10) -> DetResult:
    """exp((1/4pi^2) <r+, r->) det(1 - chi_[1,inf) Ha(h) Ha(~h^{-1}) chi_[1,inf)),
    h = exp(r_- - r_+): the large-n limit of D_n(exp(R_n - mean))."""
    lo, hi = line_support(r)
    if hi <= lo or np.all(r.evaluate(np.linspace(lo, hi, 65)) == 0):
        return DetResult(1.0 + 0j, 0.0, {"prefactor_exponent": 0j})
    expo, _ = _prefactor(r)
    h = h or build_h(r)
    det = continual_det(h, quad or HalfLineQuad(max_width=4.0), scale=1.0, offset=1.0, tol=tol)
    val = complex(np.exp(expo) * det.value)
    diag = dict(det.diagnostics, prefactor_exponent=expo, det=det.value, g_max=h.g_max)
    return DetResult(val, abs(np.exp(expo)) * det.err_est, diag)
