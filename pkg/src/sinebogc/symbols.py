"""Test functions on the circle and the line and their Fourier data.

Conventions
-----------
Circle coefficients:  F^(k) = (1/2pi) int F(theta) exp(-i k theta) dtheta.
Line transform:       f^(u) = int f(x) exp(-i u x) dx.
Reflection:           f~(x) = f(-x), so (f~)^(u) = f^(-u).

The symbol ``g = f_- - f_+`` (``F_- - F_+`` on the circle) is computed with
``ghat(u) = -sign(u) fhat(u)``; ``h = exp(g)`` and ``N = exp(G)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, NumericalFailure, ValidationError
from .quadrature import composite_legendre, gauss_legendre, gregory, graded_edges

TWO_PI = 2.0 * math.pi
DEFAULT_HILBERT_CAP = 50.0


# ---------------------------------------------------------------------------
# symbol specifications


def _as_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValidationError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def _complex_json(z):
    z = complex(z)
    return [z.real, z.imag]


class SymbolSpec:
    """Closed-form test function, evaluable pointwise to complex numbers."""

    kind = "abstract"

    def evaluate(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)

    def to_json(self) -> dict:
        raise NotImplementedError

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @property
    def is_real(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class TrigPolynomial(SymbolSpec):
    """F(theta) = sum_k c_k e^{ik theta} with finitely many coefficients.

    The zero mode may be stored; operations that need F^(0) = 0 validate it.
    """

    coeffs: tuple  # sorted ((k, c_k), ...)
    kind = "trig"

    def __init__(self, coeffs=None):
        items = dict(coeffs or {})
        clean = {}
        for k, c in items.items():
            k = int(k)
            c = _as_complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValidationError(f"non-finite coefficient at k={k}")
            if c != 0:
                clean[k] = clean.get(k, 0) + c
        object.__setattr__(self, "coeffs", tuple(sorted(clean.items())))

    @property
    def domain(self):
        return "torus"

    @property
    def coeff_map(self):
        return dict(self.coeffs)

    @property
    def degree(self):
        return max((abs(k) for k, _ in self.coeffs), default=0)

    @property
    def mean(self):
        return self.coeff_map.get(0, 0j)

    @property
    def is_real(self):
        m = self.coeff_map
        return all(abs(m.get(-k, 0) - np.conj(c)) <= 1e-15 * max(1.0, abs(c)) for k, c in m.items())

    def evaluate(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in self.coeffs:
            out += c * np.exp(1j * k * theta)
        return out

    def evaluate_disc(self, z):
        """Laurent polynomial sum_k c_k z^k at complex z (z = e^{i theta} on the circle)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for k, c in self.coeffs:
            out += c * z**k
        return out

    def to_json(self):
        return {"kind": "trig", "coeffs": {str(k): _complex_json(c) for k, c in self.coeffs}}

    @classmethod
    def cosine(cls, a):
        """2a cos(theta)."""
        return cls({1: a, -1: a})


@dataclass(frozen=True)
class SmoothBump(SymbolSpec):
    """a * exp(1 - 1/(1 - ((x-c)/w)^2)) on |x - c| < w, zero outside."""

    a: complex = 1.0
    w: float = 1.0
    c: float = 0.0
    kind = "bump"

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "w", float(self.w))
        object.__setattr__(self, "c", float(self.c))
        if not self.w > 0:
            raise ValidationError("bump half-width must be positive")

    @property
    def domain(self):
        return "line"

    @property
    def support(self):
        return (self.c - self.w, self.c + self.w)

    @property
    def is_real(self):
        return self.a.imag == 0

    @property
    def bumps(self):
        return ((1.0 + 0j, self),)

    def _profile(self, x):
        t = (np.asarray(x, dtype=float) - self.c) / self.w
        inside = np.abs(t) < 1
        p = np.zeros(t.shape)
        ti = t[inside]
        p[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
        return t, inside, p

    def evaluate(self, x):
        _, _, p = self._profile(x)
        return self.a * p

    def derivative(self, x):
        t, inside, p = self._profile(x)
        d = np.zeros(t.shape)
        ti = t[inside]
        d[inside] = p[inside] * (-2.0 * ti / (1.0 - ti * ti) ** 2) / self.w
        return self.a * d

    def shifted(self, dc):
        return SmoothBump(self.a, self.w, self.c + dc)

    def scaled(self, lam):
        """x -> f(lam x): half-width and center divide by lam."""
        return SmoothBump(self.a, self.w / lam, self.c / lam)

    def times(self, z):
        return SmoothBump(self.a * z, self.w, self.c)

    def to_json(self):
        return {"kind": "bump", "a": _complex_json(self.a), "w": self.w, "c": self.c}


@dataclass(frozen=True)
class Composite(SymbolSpec):
    """Finite linear combination sum_j weight_j * term_j of bumps."""

    terms: tuple
    weights: tuple = ()
    kind = "composite"

    def __post_init__(self):
        terms = tuple(self.terms)
        weights = tuple(complex(w) for w in self.weights) or tuple(1.0 + 0j for _ in terms)
        if len(weights) != len(terms):
            raise ValidationError("composite weights must match terms")
        if not terms:
            raise ValidationError("composite needs at least one term")
        for t in terms:
            if isinstance(t, TrigPolynomial):
                raise ValidationError("merge trig polynomials instead of composing them")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "weights", weights)

    @property
    def domain(self):
        return "line"

    @property
    def bumps(self):
        out = []
        for wgt, term in zip(self.weights, self.terms):
            out.extend((wgt * w2, b) for w2, b in term.bumps)
        return tuple(out)

    @property
    def support(self):
        lo = min(b.support[0] for _, b in self.bumps)
        hi = max(b.support[1] for _, b in self.bumps)
        return (lo, hi)

    @property
    def is_real(self):
        return all((w * b.a).imag == 0 for w, b in self.bumps)

    def evaluate(self, x):
        return sum(w * t.evaluate(x) for w, t in zip(self.weights, self.terms))

    def derivative(self, x):
        return sum(w * t.derivative(x) for w, t in zip(self.weights, self.terms))

    def shifted(self, dc):
        return Composite(tuple(t.shifted(dc) for t in self.terms), self.weights)

    def scaled(self, lam):
        return Composite(tuple(t.scaled(lam) for t in self.terms), self.weights)

    def times(self, z):
        return Composite(self.terms, tuple(z * w for w in self.weights))

    def to_json(self):
        out = {"kind": "composite", "terms": [t.to_json() for t in self.terms]}
        if any(w != 1 for w in self.weights):
            out["weights"] = [_complex_json(w) for w in self.weights]
        return out


def symbol_from_json(obj) -> SymbolSpec:
    """Inverse of ``SymbolSpec.to_json``; accepts a dict or a JSON string."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("symbol must be a JSON object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "trig":
            return TrigPolynomial(obj.get("coeffs", {}))
        if kind == "bump":
            return SmoothBump(_as_complex(obj.get("a", 1.0)), float(obj.get("w", 1.0)), float(obj.get("c", 0.0)))
        if kind == "composite":
            terms = tuple(symbol_from_json(t) for t in obj["terms"])
            weights = tuple(_as_complex(w) for w in obj.get("weights", ()))
            return Composite(terms, weights)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed {kind} symbol: {exc}") from exc
    raise ValidationError(f"unknown symbol kind {kind!r}")


def line_support(spec):
    if isinstance(spec, TrigPolynomial):
        raise ValidationError("trig polynomials live on the circle, not the line")
    return spec.support


def scale_to_torus(r: SymbolSpec, n: int) -> SymbolSpec:
    """R_n(theta) = r(n theta) on [-pi, pi]; returned as a bump-type spec
    with shrunken support, to be evaluated on the circle."""
    n = int(n)
    if n < 1:
        raise ValidationError("scaling factor n must be a positive integer")
    lo, hi = line_support(r)
    reach = max(abs(lo), abs(hi))
    if reach / n >= math.pi:
        need = int(math.floor(reach / math.pi)) + 1
        raise ValidationError(f"support of r(n.) leaves (-pi, pi) for n={n}; minimal admissible n is {need}")
    return r.scaled(n)


# ---------------------------------------------------------------------------
# spectral data


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Fourier data on a symmetric index/frequency grid.

    Torus: ``index`` = -K..K (ints), ``values`` = F^(k).
    Line:  ``index`` = j*du for |j| <= J, ``values`` = f^(j du).
    """

    domain: str
    index: np.ndarray
    values: np.ndarray
    du: float = 1.0
    source: SymbolSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.array(self.index)
        vals = np.array(self.values, dtype=complex)
        if idx.shape != vals.shape or idx.ndim != 1 or idx.size % 2 != 1:
            raise ValidationError("spectral data needs a symmetric 1-D grid")
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "values", vals)

    @property
    def half(self):
        return self.index.size // 2

    @property
    def K_max(self):
        return self.half

    @property
    def U_max(self):
        return float(self.index[-1])

    def zero_mode(self):
        return self.values[self.half]

    def coeff(self, k):
        """F^(k) for integer k (torus); zero beyond the stored range is an error."""
        k = np.asarray(k)
        if np.any(np.abs(k) > self.half):
            raise ValidationError(f"coefficient index beyond stored range |k| <= {self.half}")
        return self.values[k + self.half]

    def _masked(self, mask):
        vals = np.where(mask, self.values, 0)
        return SpectralData(self.domain, self.index, vals, self.du, self.source, dict(self.meta))

    def plus(self):
        return self._masked(self.index > 0)

    def minus(self):
        return self._masked(self.index < 0)

    def reflect(self):
        return SpectralData(self.domain, self.index, self.values[::-1].copy(), self.du, None, dict(self.meta))

    def __add__(self, other):
        _check_same_grid(self, other)
        return SpectralData(self.domain, self.index, self.values + other.values, self.du, None)


def _check_same_grid(a, b):
    if a.domain != b.domain or a.index.shape != b.index.shape or not np.array_equal(a.index, b.index):
        raise ValidationError("spectral data live on different grids")


def split(sd: SpectralData):
    """(plus, minus): strictly positive and strictly negative parts."""
    return sd.plus(), sd.minus()


def _pow2_at_least(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def torus_grid_size(spec, K_max):
    """Uniform grid size for the circle DFT: >= 8*K_max, and fine enough to
    resolve the narrowest bump with 256 points per half-width."""
    m = 8 * K_max
    if not isinstance(spec, TrigPolynomial):
        wmin = min(b.w for _, b in spec.bumps)
        m = max(m, int(math.ceil(TWO_PI * 256 / wmin)))
    else:
        m = max(m, 4 * spec.degree + 4)
    return _pow2_at_least(m)


def torus_grid(m):
    theta = TWO_PI * np.arange(m) / m
    return np.where(theta >= math.pi, theta - TWO_PI, theta)


def _evaluate_torus(spec, theta):
    if isinstance(spec, TrigPolynomial):
        return spec.evaluate(theta)
    lo, hi = spec.support
    if lo <= -math.pi or hi >= math.pi:
        raise ValidationError("support does not fit inside (-pi, pi); cannot place the function on the circle")
    return spec.evaluate(theta)


def coefficients_from_grid(values, K):
    """Circle coefficients -K..K from samples on ``torus_grid(len(values))``."""
    m = values.size
    if m < 2 * K + 1:
        raise ValidationError("grid too coarse for requested coefficient range")
    c = np.fft.fft(values) / m
    k = np.arange(-K, K + 1)
    return c[k % m]


def fourier_torus(spec: SymbolSpec, K_max: int, n_grid: int | None = None) -> SpectralData:
    """F^(k), |k| <= K_max; exact for trig polynomials, DFT otherwise."""
    K_max = int(K_max)
    if K_max <= 0:
        raise ValidationError("K_max must be positive")
    k = np.arange(-K_max, K_max + 1)
    if isinstance(spec, TrigPolynomial):
        cm = spec.coeff_map
        vals = np.array([cm.get(int(j), 0j) for j in k], dtype=complex)
        return SpectralData("torus", k, vals, source=spec, meta={"exact": True})
    m = n_grid or torus_grid_size(spec, K_max)
    m = max(int(m), 8 * K_max)
    vals = coefficients_from_grid(_evaluate_torus(spec, torus_grid(m)), K_max)
    return SpectralData("torus", k, vals, source=spec, meta={"exact": False, "n_grid": m})


def grid_values_torus(sd: SpectralData, m):
    """Evaluate sum_k F^(k) e^{ik theta} on ``torus_grid(m)``; coefficients
    are folded mod m, which is exact at the grid points."""
    buf = np.zeros(m, dtype=complex)
    k = sd.index.astype(int)
    np.add.at(buf, k % m, sd.values)
    return np.fft.ifft(buf) * m


def exp_symbol(sd: SpectralData, K_out: int, n_grid: int | None = None) -> SpectralData:
    """Circle coefficients of exp(F) from those of F."""
    m = n_grid or _pow2_at_least(max(8 * max(K_out, sd.half), 64))
    vals = grid_values_torus(sd, m)
    if vals.real.max() > 700:
        raise NumericalFailure("exp(F) overflows on the evaluation grid")
    k = np.arange(-K_out, K_out + 1)
    return SpectralData("torus", k, coefficients_from_grid(np.exp(vals), K_out), meta={"n_grid": m})


def fourier_torus_exp(spec: SymbolSpec, K_max: int, center=True, n_grid=None):
    """Coefficients of exp(F - F^(0)) (or exp(F)) straight from the symbol.

    Returns (SpectralData, F^(0))."""
    if isinstance(spec, TrigPolynomial):
        m = n_grid or _pow2_at_least(max(8 * K_max, 8 * spec.degree, 256))
    else:
        m = n_grid or torus_grid_size(spec, K_max)
    vals = _evaluate_torus(spec, torus_grid(m))
    mean = complex(vals.mean()) if not isinstance(spec, TrigPolynomial) else complex(spec.mean)
    if center:
        vals = vals - mean
    if vals.real.max() > 700:
        raise NumericalFailure("exp(F) overflows on the evaluation grid")
    k = np.arange(-K_max, K_max + 1)
    return SpectralData("torus", k, coefficients_from_grid(np.exp(vals), K_max), meta={"n_grid": m}), mean


def require_zero_mean(sd: SpectralData, tol=1e-13):
    scale = max(1.0, float(np.abs(sd.values).max(initial=0.0)))
    if abs(sd.zero_mode()) > tol * scale:
        raise HypothesisError(f"formula requires F^(0) = 0, got {sd.zero_mode():.3e}")


# ---------------------------------------------------------------------------
# circle symbol N = exp(F_- - F_+)


@dataclass(frozen=True, eq=False)
class TorusDerived:
    """Coefficients of N = exp(F_- - F_+) and of the reflected inverse
    ~N^{-1}, plus Cauchy-estimate data for certified coefficient tails."""

    N: SpectralData
    N_inv_reflected: SpectralData
    source: SpectralData
    tail_N: tuple | None = None  # ((rho, max |N| on |z| = rho), ...)
    tail_Ninv: tuple | None = None  # ((rho, max |N^{-1}| on |z| = 1/rho), ...)

    def tail_bound(self, which, k0, weight_shift=0):
        """Upper bound of sum_{k >= k0} (k - weight_shift) |c_k|^2 for the
        positive-index coefficients of N (``which='N'``) or ~N^{-1}."""
        data = self.tail_N if which == "N" else self.tail_Ninv
        if not data:
            return math.inf
        k0 = max(int(k0), 1, weight_shift + 1)
        a = k0 - weight_shift
        best = math.inf
        for rho, big in data:
            # |c_k| <= big rho^-k, and
            # sum_{k>=k0} (k - s) x^k = x^k0 (a - (a - 1) x) / (1 - x)^2 with x = rho^-2
            x = rho**-2.0
            log_b = 2 * math.log(big) + k0 * math.log(x) + math.log(a - (a - 1) * x) - 2 * math.log(1 - x)
            if log_b < 700:
                best = min(best, math.exp(log_b) if log_b > -745 else 0.0)
        return best


def _laurent_split_eval(sd, z):
    """(F_+(z), F_-(z)) for circle data sd at complex z."""
    k = sd.index.astype(int)
    vals = sd.values
    plus = np.zeros(np.shape(z), dtype=complex)
    minus = np.zeros(np.shape(z), dtype=complex)
    for kk, c in zip(k, vals):
        if c == 0:
            continue
        if kk > 0:
            plus += c * z**kk
        elif kk < 0:
            minus += c * z**kk
    return plus, minus


def _cauchy_radii(sd, sign, rhos=(1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0), npts=1024):
    """Cauchy-estimate data for the coefficients of exp(sign (F_- - F_+)):
    pairs (rho, max modulus on |z| = rho^sign).  Only for finite Laurent data;
    the maximum is a dense-grid maximum padded by 5%."""
    if np.count_nonzero(sd.values) > 64:
        return None
    theta = TWO_PI * np.arange(npts) / npts
    out = []
    for rho in rhos:
        r = rho if sign > 0 else 1.0 / rho
        fp, fm = _laurent_split_eval(sd, r * np.exp(1j * theta))
        top = float((sign * (fm - fp)).real.max())
        if top > 600:
            continue
        out.append((rho, math.exp(top) * 1.05))
    return tuple(out) or None


def _exp_series(p, K):
    """Taylor coefficients e_0..e_K of exp(sum_j p_j w^j), p = (p_1, .., p_d).

    From k e_k = sum_j j p_j e_{k-j}; the tail keeps full relative accuracy,
    which an FFT of the values cannot give once |e_k| drops below eps."""
    d = len(p)
    jp = np.arange(1, d + 1) * np.asarray(p, dtype=complex)
    e = np.zeros(K + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, K + 1):
        j = min(d, k)
        e[k] = np.dot(jp[:j], e[k - 1 :: -1][:j]) / k
    return e


def _laurent_exp(neg, pos, K):
    """Coefficients -K..K of exp(sum_j neg_j z^-j) exp(sum_j pos_j z^j)."""
    L = K + 64 + 8 * max(len(neg), len(pos))
    a = _exp_series(neg, L)  # z^-m
    b = _exp_series(pos, L)  # z^m
    full = np.convolve(b, a[::-1])  # index i <-> power i - L
    return full[L - K : L + K + 1]


def build_N(sd: SpectralData, K_out: int, n_grid: int | None = None) -> TorusDerived:
    """N^(k), |k| <= K_out, for N = exp(F_- - F_+), and coefficients of ~N^{-1}.

    Trig polynomials use the power series of exp on each half (accurate far
    into the tail); other data go through an FFT of exp on a grid."""
    if sd.domain != "torus":
        raise ValidationError("build_N needs circle data")
    require_zero_mean(sd)
    K_out = int(K_out)
    exact = sd.meta.get("exact", False)
    k = np.arange(-K_out, K_out + 1)
    d = int(np.max(np.abs(sd.index[sd.values != 0]), initial=0))
    if exact and d <= 64:
        fp = sd.coeff(np.arange(1, d + 1)) if d else np.zeros(0)
        fm = sd.coeff(-np.arange(1, d + 1)) if d else np.zeros(0)
        # |exp| on the circle must stay in range for the series to be usable
        g = grid_values_torus(sd.minus(), 256) - grid_values_torus(sd.plus(), 256)
        if np.abs(g.real).max() > 300:
            raise NumericalFailure("exp(F_- - F_+) leaves floating-point range")
        Nvals = _laurent_exp(fm, -fp, K_out)
        # ~N^{-1}(z) = exp(-F_-(1/z) + F_+(1/z))
        Ninv_r_vals = _laurent_exp(fp, -fm, K_out)
        N = SpectralData("torus", k, Nvals, meta={"series": True})
        Ninv_r = SpectralData("torus", k, Ninv_r_vals, meta={"series": True})
    else:
        m = n_grid or _pow2_at_least(max(8 * K_out, 8 * sd.half, 256))
        plus, minus = split(sd)
        g = grid_values_torus(minus, m) - grid_values_torus(plus, m)
        if np.abs(g.real).max() > 700:
            raise NumericalFailure("exp(F_- - F_+) leaves floating-point range")
        Nvals = coefficients_from_grid(np.exp(g), K_out)
        Ninv = coefficients_from_grid(np.exp(-g), K_out)
        N = SpectralData("torus", k, Nvals, meta={"n_grid": m})
        Ninv_r = SpectralData("torus", k, Ninv[::-1].copy(), meta={"n_grid": m})
    tail_N = _cauchy_radii(sd, +1) if exact else None
    tail_Ni = _cauchy_radii(sd, -1) if exact else None
    return TorusDerived(N, Ninv_r, sd, tail_N, tail_Ni)


def sobolev_pair_torus(a: SpectralData, b: SpectralData):
    """<F1, F2> = sum_k |k| F1^(k) F2^(-k).  Returns (value, last-term size)."""
    _check_same_grid(a, b)
    if a.domain != "torus":
        raise ValidationError("circle pairing needs circle data")
    k = a.index.astype(float)
    terms = np.abs(k) * a.values * b.values[::-1]
    edge = float(max(abs(terms[0]), abs(terms[-1])))
    return complex(terms.sum()), edge


def szego_exponent(sd: SpectralData):
    """sum_{k>0} k F^(k) F^(-k) = <F_+, F_->."""
    plus, minus = split(sd)
    return sobolev_pair_torus(plus, minus)[0]


# ---------------------------------------------------------------------------
# line transforms


def _bump_transform(bump, u, tol=1e-12, q0=None, chunk=2048):
    """int bump(x) e^{-iux} dx by Gauss-Legendre with order doubling."""
    u = np.asarray(u, dtype=float)
    if bump.a == 0:
        return np.zeros(u.shape, dtype=complex), 0.0
    umax = float(np.abs(u).max(initial=0.0))
    q = q0 or max(64, int(1.2 * umax * bump.w) + 48)
    lo, hi = bump.support

    def at(qq):
        x, w = gauss_legendre(qq, lo, hi)
        fw = bump.evaluate(x) * w
        out = np.empty(u.shape, dtype=complex)
        flat, res = u.ravel(), out.reshape(-1)
        for i in range(0, flat.size, chunk):
            res[i : i + chunk] = np.exp(-1j * np.outer(flat[i : i + chunk], x)) @ fw
        return out

    # settle the order on a probe set containing the extreme frequencies,
    # then evaluate everything once at that order
    full = u
    if u.size > 257:
        flat = np.sort(np.abs(u.ravel()))
        u = flat[np.linspace(0, flat.size - 1, 257).astype(int)]
    prev = at(q)
    for _ in range(8):
        q *= 2
        cur = at(q)
        delta = float(np.abs(cur - prev).max(initial=0.0))
        if delta < tol * max(1.0, abs(bump.a) * bump.w):
            if full is u:
                return cur, delta
            # the lower order of the converged pair is already within delta
            u = full
            return at(q // 2), delta
        prev = cur
    raise NumericalFailure("line transform failed to converge under order doubling", best=prev)


def line_transform(spec: SymbolSpec, u, tol=1e-12):
    """f^(u) = int f(x) e^{-iux} dx at arbitrary real u."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape, dtype=complex)
    for wgt, b in spec.bumps:
        val, _ = _bump_transform(b, u, tol)
        out += wgt * val
    return out


def default_du(spec):
    lo, hi = line_support(spec)
    reach = max(abs(lo), abs(hi), 1e-3)
    return min(0.05, math.pi / (32 * reach))


def default_umax(spec, rel=1e-13):
    """Frequency beyond which |f^| stays below rel * |f^|_max (scan on a
    doubling sequence, then a fine check of the last octave)."""
    wmin = min(b.w for _, b in spec.bumps)
    peak = float(np.abs(line_transform(spec, np.linspace(0, 4.0 / wmin, 64))).max())
    if peak == 0:
        return 1.0 / wmin
    u = 4.0 / wmin
    while u < 1e4 / wmin:
        probe = np.linspace(u, 2 * u, 129)
        if np.abs(line_transform(spec, probe)).max() < rel * peak:
            return u
        u *= 2
    raise NumericalFailure("transform does not decay; symbol too rough for the line routes")


def fourier_line(spec: SymbolSpec, du=None, U_max=None) -> SpectralData:
    """Samples f^(j du), |j du| <= U_max, by Gauss-Legendre over the support."""
    du = default_du(spec) if du is None else float(du)
    U_max = default_umax(spec) if U_max is None else float(U_max)
    if du <= 0 or U_max <= 0:
        raise ValidationError("du and U_max must be positive")
    J = int(math.ceil(U_max / du))
    u = du * np.arange(-J, J + 1)
    vals = line_transform(spec, u)
    # exact symmetry of the grid: real f gives f^(-u) = conj f^(u)
    if spec.is_real:
        half = J
        vals[:half] = np.conj(vals[::-1][:half])
    return SpectralData("line", u, vals, du=du, source=spec)


def sobolev_pair_line(a: SpectralData, b: SpectralData):
    """<f1, f2> = int |u| f1^(u) f2^(-u) du, end-corrected trapezoid on each half-line."""
    _check_same_grid(a, b)
    if a.domain != "line":
        raise ValidationError("line pairing needs line data")
    u = a.index
    prod = np.abs(u) * a.values * b.values[::-1]
    j = a.half
    right = gregory(prod[j:], a.du)
    left = gregory(prod[: j + 1][::-1], a.du)
    return complex(right + left)


def line_szego_exponent(sd: SpectralData):
    """int_0^inf u f^(u) f^(-u) du = <f_+, f_->."""
    plus, minus = split(sd)
    return sobolev_pair_line(plus, minus)


# ---------------------------------------------------------------------------
# line symbol h = exp(f_- - f_+)


class _CauchyBump:
    """Cauchy-type integrals of one bump on its Gauss-Legendre nodes."""

    def __init__(self, weight, bump, q):
        self.weight = weight
        self.bump = bump
        self.lo, self.hi = bump.support
        self.y, w = gauss_legendre(q, self.lo, self.hi)
        self.wf = w * bump.evaluate(self.y)
        self.w = w

    def _regular(self, z, chunk=256):
        z = np.asarray(z)
        flat = z.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, flat.size, chunk):
            zz = flat[i : i + chunk]
            out[i : i + chunk] = (self.wf[None, :] / (self.y[None, :] - zz[:, None])).sum(axis=1)
        return out.reshape(z.shape)

    def integral(self, z):
        """(PV) int f(y)/(y - z) dy, principal value for real z in the support."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape, dtype=complex)
        inside = (z.imag == 0) & (z.real > self.lo) & (z.real < self.hi)
        if np.any(~inside):
            out[~inside] = self._regular(z[~inside])
        if np.any(inside):
            x = z.real[inside]
            fx = self.bump.evaluate(x)
            dfx = self.bump.derivative(x)
            d = self.y[None, :] - x[:, None]
            fy = self.bump.evaluate(self.y)
            with np.errstate(divide="ignore", invalid="ignore"):
                qt = np.where(d != 0, (fy[None, :] - fx[:, None]) / d, dfx[:, None])
            pv = qt @ self.w + fx * np.log((self.hi - x) / (x - self.lo))
            out[inside] = pv
        return out


def hilbert_exponent(spec: SymbolSpec, z, q=400):
    """g = f_- - f_+ at real points, continued analytically off the support.

    g(z) = (i/pi) int f(y)/(y - z) dy (principal value on the support).
    """
    parts = [_CauchyBump(w, b, q) for w, b in spec.bumps if b.a != 0]
    z = np.asarray(z, dtype=complex)
    g = np.zeros(z.shape, dtype=complex)
    for p in parts:
        g += p.weight * p.integral(z)
    return (1j / math.pi) * g


@dataclass(frozen=True, eq=False)
class LineDerived:
    """h = exp(f_- - f_+) and ~h^{-1}, with transforms of h - 1 and
    ~h^{-1} - 1 at arbitrary frequencies.

    Transforms integrate exp(+-g) - 1 along the real segment spanning the
    support and along vertical legs from its end points into the half-plane
    where e^{-iux} decays; outside the support g is analytic, so the legs
    replace the slowly decaying real tails exactly.
    """

    spec: SymbolSpec
    center: float
    g_max: float
    grid_x: np.ndarray
    h_minus_1: np.ndarray
    hinv_tilde_minus_1: np.ndarray
    _mid: tuple  # (x, w, g on x)
    _legs: dict  # (end, sign of u) -> (y, w, g on leg)
    U_max: float
    transforms: SpectralData | None = None
    transforms_inv: SpectralData | None = None

    def _transform(self, u, sigma):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape, dtype=complex)
        keep = (np.abs(u) <= self.U_max) & (u != 0)
        if not np.any(keep):
            return out
        uu = u[keep]
        x, w, gm = self._mid
        phi = (np.exp(sigma * gm) - 1) * w
        res = np.empty(uu.shape, dtype=complex)
        for i in range(0, uu.size, 1024):
            res[i : i + 1024] = np.exp(-1j * np.outer(uu[i : i + 1024], x)) @ phi
        for s in (1.0, -1.0):
            sel = np.sign(uu) == s
            if not np.any(sel):
                continue
            us = uu[sel]
            au = np.abs(us)
            acc = np.zeros(us.shape, dtype=complex)
            for end, orient in (("hi", -1.0), ("lo", 1.0)):
                y, wy, gl = self._legs[(end, s)]
                R = self._legs[(end, "x")]
                ph = (np.exp(sigma * gl) - 1) * wy
                # int_R^inf = -i s int_0^inf phi(R - i s y) e^{-iuR} e^{-|u| y} dy (right end)
                lap = np.empty(us.shape, dtype=complex)
                for i in range(0, us.size, 1024):
                    lap[i : i + 1024] = np.exp(-np.outer(au[i : i + 1024], y)) @ ph
                acc += orient * 1j * s * np.exp(-1j * us * R) * lap
            res[sel] += acc
        out[keep] = res
        return out

    def hhat(self, u):
        """Transform of h - 1 at u (located at the symbol's own position)."""
        return self._transform(u, 1.0) * np.exp(-1j * np.asarray(u, dtype=float) * self.center)

    def hinv_hat(self, u):
        """Transform of h^{-1} - 1 at u."""
        return self._transform(u, -1.0) * np.exp(-1j * np.asarray(u, dtype=float) * self.center)

    def hinv_tilde_hat(self, u):
        """Transform of ~h^{-1} - 1 = (h^{-1} - 1)(-.) at u."""
        return self.hinv_hat(-np.asarray(u, dtype=float))

    def hhat_centered(self, u):
        """Transform of h - 1 for the symbol translated to be centred at 0."""
        return self._transform(u, 1.0)

    def hinv_hat_centered(self, u):
        return self._transform(u, -1.0)


def _leg_nodes(umin):
    """Fixed nodes on (0, inf) for int phi(y) e^{-|u| y} dy with |u| >= umin.

    Geometric panels resolve the e^{-|u| y} layer for every |u| up to 1e6."""
    edges = graded_edges(1e-7, 60.0 / umin, 2.0)
    return composite_legendre(edges, 10)


def build_h(sd_or_spec, cap=DEFAULT_HILBERT_CAP, q_cauchy=400, q_mid=None, U_max=None,
            n_grid=801, with_samples=True) -> LineDerived:
    """Derived line symbols for f; rejects symbols whose |f_- - f_+| exceeds ``cap``.

    ``sd_or_spec`` is SpectralData(line) carrying its source symbol, or the
    symbol itself.  Transforms are computed with the symbol translated so the
    support is centred at 0; the public methods restore the position.
    """
    if isinstance(sd_or_spec, SpectralData):
        if sd_or_spec.domain != "line" or sd_or_spec.source is None:
            raise ValidationError("build_h needs line data with its source symbol")
        spec = sd_or_spec.source
        U_max = U_max or sd_or_spec.U_max
    else:
        spec = sd_or_spec
    lo, hi = line_support(spec)
    center = 0.5 * (lo + hi)
    cspec = spec.shifted(-center)
    half = 0.5 * (hi - lo)
    U_max = float(U_max or default_umax(cspec))
    q_mid = q_mid or max(400, int(1.3 * U_max * half) + 200)
    x, w = gauss_legendre(q_mid, -half, half)
    g_mid = hilbert_exponent(cspec, x, q_cauchy)
    grid = center + np.linspace(-3 * half, 3 * half, n_grid if with_samples else 3)
    g_grid = hilbert_exponent(spec, grid, q_cauchy)
    g_max = float(max(np.abs(g_mid).max(), np.abs(g_grid).max()))
    if not math.isfinite(g_max) or g_max > cap:
        raise HypothesisError(
            f"|f_- - f_+| reaches {g_max:.3g} > cap {cap}; the bounded Hilbert-transform hypothesis looks violated")
    umin = max(1e-3, 1.0 / max(half, 1e-12)) * 1e-2
    y, wy = _leg_nodes(umin)
    legs = {("hi", "x"): half, ("lo", "x"): -half}
    for s in (1.0, -1.0):
        for end, R in (("hi", half), ("lo", -half)):
            legs[(end, s)] = (y, wy, hilbert_exponent(cspec, R - 1j * s * y, q_cauchy))
    hm1 = np.exp(g_grid) - 1
    hinv_t = np.exp(-hilbert_exponent(spec, -grid, q_cauchy)) - 1
    return LineDerived(spec, center, g_max, grid, hm1, hinv_t, (x, w, g_mid), legs, U_max)


def h_transform_samples(derived: LineDerived, du, U_max):
    """SpectralData of the transforms of h - 1 and ~h^{-1} - 1 on a grid."""
    J = int(math.ceil(U_max / du))
    u = du * np.arange(-J, J + 1)
    return (SpectralData("line", u, derived.hhat(u), du=du),
            SpectralData("line", u, derived.hinv_tilde_hat(u), du=du))


def edge_decay_check(values, rel=1e-10):
    """True if the samples at the grid ends are below rel * max."""
    v = np.abs(np.asarray(values))
    peak = v.max(initial=0.0)
    return peak == 0 or max(v[0], v[-1]) <= rel * peak
