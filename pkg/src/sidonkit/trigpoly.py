"""Real trigonometric polynomials on [0, 2pi) and certified norm enclosures.

A polynomial is stored as

    t(x) = A + sum_{k=1}^{N} (a_k cos kx + b_k sin kx)

with ``constant = A``, ``cos[k-1] = a_k`` and ``sin[k-1] = b_k``.

Sup and L1 norms are returned as :class:`NormEnclosure` intervals. Both use a
uniform FFT grid followed by local refinement of the cells that can still
matter. Cell bounds come from a second-order Taylor estimate with the
Bernstein inequality ``||t''|| <= N^2 ||t||``, plus an explicit allowance for
floating-point evaluation error, so the intervals are sound rather than
estimates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceededError

__all__ = [
    "TrigPoly",
    "NormEnclosure",
    "evaluate",
    "grid_values",
    "multiply",
    "dyadic_block",
    "dyadic_blocks",
    "norm_l2_exact",
    "norm_sup",
    "norm_l1",
    "DEFAULT_MAX_POINTS",
]

TWO_PI = 2.0 * math.pi
EPS = np.finfo(float).eps
DEFAULT_MAX_POINTS = 2**24
_CHUNK = 1 << 20  # entries per dense cos/sin block in direct evaluation

# 2 pi = _C1 + _C2 + _C3 (Cody-Waite): _C1 has 30 significant bits and _C2
# at most 23, so q * _C1 and q * _C2 are exact for |q| < 2^23.
_C1 = math.ldexp(math.floor(math.ldexp(TWO_PI, 27)), -27)
_C2 = TWO_PI - _C1
_C3 = 2.4492935982947064e-16  # 2 pi - TWO_PI
_SPLIT = float((1 << 21) + 1)  # Veltkamp factor leaving 32-bit high parts
_PRECISE_K = 1 << 21
_PRECISE_X = math.ldexp(1.0, 22) * TWO_PI


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Immutable real trigonometric polynomial.

    ``cos`` and ``sin`` must have equal length ``N``. ``sin`` may be omitted
    and defaults to zeros.
    """

    constant: float
    cos: np.ndarray
    sin: np.ndarray

    def __init__(self, constant=0.0, cos: Iterable[float] = (), sin: Iterable[float] | None = None):
        a = np.array(cos, dtype=float).reshape(-1)
        b = np.zeros_like(a) if sin is None else np.array(sin, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError(f"cos and sin must have equal length, got {a.size} and {b.size}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "constant", float(constant))
        object.__setattr__(self, "cos", a)
        object.__setattr__(self, "sin", b)

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls) -> "TrigPoly":
        return cls(0.0)

    @classmethod
    def cosine(cls, n: int, amplitude: float = 1.0) -> "TrigPoly":
        """``amplitude * cos(n x)``."""
        if n == 0:
            return cls(amplitude)
        a = np.zeros(n)
        a[n - 1] = amplitude
        return cls(0.0, a)

    @classmethod
    def sine(cls, n: int, amplitude: float = 1.0) -> "TrigPoly":
        if n == 0:
            return cls(0.0)
        b = np.zeros(n)
        b[n - 1] = amplitude
        return cls(0.0, np.zeros(n), b)

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        """Inverse of :meth:`to_dict` (the JSON interchange format)."""
        unknown = set(d) - {"constant", "cos", "sin"}
        if unknown:
            raise ValueError(f"unknown polynomial keys: {sorted(unknown)}")
        return cls(d.get("constant", 0.0), d.get("cos", []), d.get("sin"))

    def to_dict(self) -> dict:
        return {"constant": self.constant, "cos": self.cos.tolist(), "sin": self.sin.tolist()}

    # -- structure ----------------------------------------------------
    @property
    def N(self) -> int:
        """Representation degree (length of the coefficient arrays)."""
        return int(self.cos.size)

    @property
    def degree(self) -> int:
        """Exact degree; 0 for constants and for the zero polynomial."""
        nz = np.flatnonzero((self.cos != 0) | (self.sin != 0))
        return int(nz[-1]) + 1 if nz.size else 0

    def canonical(self) -> "TrigPoly":
        """Drop trailing (a_k, b_k) pairs that are exactly zero."""
        d = self.degree
        if d == self.N:
            return self
        return TrigPoly(self.constant, self.cos[:d], self.sin[:d])

    def is_canonical(self) -> bool:
        return self.degree == self.N

    def padded(self, n: int) -> "TrigPoly":
        """Same polynomial with representation degree ``max(N, n)``."""
        if n <= self.N:
            return self
        a = np.zeros(n)
        b = np.zeros(n)
        a[: self.N] = self.cos
        b[: self.N] = self.sin
        return TrigPoly(self.constant, a, b)

    def is_zero(self) -> bool:
        return self.constant == 0 and self.degree == 0

    def coefficient_mass(self) -> float:
        """``|A| + sum(|a_k| + |b_k|)``, an upper bound for the sup norm."""
        return abs(self.constant) + float(np.abs(self.cos).sum() + np.abs(self.sin).sum())

    def derivative(self) -> "TrigPoly":
        k = np.arange(1, self.N + 1, dtype=float)
        return TrigPoly(0.0, k * self.sin, -k * self.cos)

    def shifted(self, s: float) -> "TrigPoly":
        """The polynomial ``x -> t(x + s)``."""
        k = np.arange(1, self.N + 1, dtype=float)
        c, sn = np.cos(k * s), np.sin(k * s)
        return TrigPoly(self.constant, self.cos * c + self.sin * sn, self.sin * c - self.cos * sn)

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            return NotImplemented
        n = max(self.N, other.N)
        s, o = self.padded(n), other.padded(n)
        return TrigPoly(s.constant + o.constant, s.cos + o.cos, s.sin + o.sin)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(-self.constant, -self.cos, -self.sin)

    def scale(self, alpha: float) -> "TrigPoly":
        return TrigPoly(alpha * self.constant, alpha * self.cos, alpha * self.sin)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return multiply(self, other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(float(other))
        return NotImplemented

    __rmul__ = __mul__

    def __call__(self, x):
        return evaluate(self, x)

    def coefficients_equal(self, other: "TrigPoly") -> bool:
        """Exact equality of coefficients, ignoring trailing zeros."""
        a, b = self.canonical(), other.canonical()
        return (
            a.constant == b.constant
            and a.N == b.N
            and bool(np.array_equal(a.cos, b.cos))
            and bool(np.array_equal(a.sin, b.sin))
        )

    def __repr__(self) -> str:
        return f"TrigPoly(constant={self.constant!r}, N={self.N})"


@dataclass(frozen=True)
class NormEnclosure:
    """Certified interval ``[lower, upper]`` for an L1 or sup norm."""

    lower: float
    upper: float
    p: float  # 1.0 or math.inf
    grid_points: int

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "grid_points", int(self.grid_points))

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "p": "inf" if math.isinf(self.p) else int(self.p),
            "grid_points": self.grid_points,
        }


# ---------------------------------------------------------------------------
# evaluation


def _reduce(a: np.ndarray):
    """a mod 2 pi as an unevaluated sum hi + lo, for |a| < 2^22 * 2 pi."""
    q = np.round(a / TWO_PI)
    r = a - q * _C1  # exact: Sterbenz when q != 0
    y = q * _C2
    hi = r - y
    bb = hi - r
    lo = ((r - (hi - bb)) + (-y - bb)) - q * _C3  # two-sum error, then the tail
    return hi, lo


def _angles(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """k x mod 2 pi for every pair, accurate to a few ulps of pi.

    Plain ``k * x`` rounds the product, an absolute error near ulp(k x)
    that grows with k. Here x is reduced first, its high part (32 bits)
    times k (< 2^21) is exact, and the big product is reduced again.
    """
    xh, xl = _reduce(x)
    g = _SPLIT * xh
    sh = g - (g - xh)
    sl = xh - sh
    ah, al = _reduce(np.outer(sh, k))
    return ah + (al + np.outer(sl + xl, k))


def _direct(t: TrigPoly, x: np.ndarray, derivative: bool = False):
    """Dense evaluation of t (and t') at arbitrary points, chunked by rows."""
    x = np.asarray(x, dtype=float)
    n = t.N
    out = np.full(x.shape, t.constant)
    dout = np.zeros(x.shape) if derivative else None
    if n == 0 or x.size == 0:
        return (out, dout) if derivative else out
    k = np.arange(1, n + 1, dtype=float)
    flat = x.reshape(-1)
    o = out.reshape(-1)
    do = dout.reshape(-1) if derivative else None
    step = max(1, _CHUNK // n)
    ka, kb = k * t.cos, k * t.sin
    precise = n < _PRECISE_K and bool(np.all(np.abs(flat) < _PRECISE_X))
    for s in range(0, flat.size, step):
        if precise:
            arg = _angles(flat[s : s + step], k)
        else:
            arg = np.outer(flat[s : s + step], k)
        c, sn = np.cos(arg), np.sin(arg)
        o[s : s + step] += c @ t.cos + sn @ t.sin
        if derivative:
            do[s : s + step] = c @ kb - sn @ ka
    return (out, dout) if derivative else out


def evaluate(t: TrigPoly, x):
    """Value of ``t`` at ``x`` (scalar or array, radians)."""
    if np.isscalar(x):
        if not math.isfinite(x):
            raise ValueError("x must be finite")
        return float(_direct(t, np.array([x]))[0])
    return _direct(t, np.asarray(x, dtype=float))


def _grid(t: TrigPoly, M: int) -> np.ndarray:
    """Values at x_j = 2 pi j / M, j < M, via one inverse real FFT (M > 2N)."""
    X = np.zeros(M // 2 + 1, dtype=complex)
    X[0] = t.constant * M
    n = t.N
    X[1 : n + 1] = 0.5 * M * (t.cos - 1j * t.sin)
    return np.fft.irfft(X, n=M)


def grid_values(t: TrigPoly, M: int) -> np.ndarray:
    """t at the M equispaced points 2 pi j / M (M > 2N), by inverse FFT."""
    if M <= 2 * t.N:
        raise ValueError(f"need M > 2N = {2 * t.N}")
    return _grid(t, M)


def _dyadic(t: TrigPoly, num: np.ndarray, L: int, derivative: bool = False):
    """t (and t') at x = 2 pi num / 2^L with exact integer argument reduction.

    Requires N * 2^L < 2^63 so that k * num fits in int64.
    """
    n = t.N
    num = np.asarray(num, dtype=np.int64)
    out = np.full(num.shape, t.constant)
    dout = np.zeros(num.shape) if derivative else None
    if n == 0 or num.size == 0:
        return (out, dout) if derivative else out
    k = np.arange(1, n + 1, dtype=np.int64)
    kf = k.astype(float)
    mask = (np.int64(1) << L) - 1
    scale = TWO_PI / float(1 << L)
    ka, kb = kf * t.cos, kf * t.sin
    step = max(1, _CHUNK // n)
    for s in range(0, num.size, step):
        r = (np.outer(num[s : s + step], k) & mask).astype(float)
        arg = r * scale
        c, sn = np.cos(arg), np.sin(arg)
        out[s : s + step] += c @ t.cos + sn @ t.sin
        if derivative:
            dout[s : s + step] = c @ kb - sn @ ka
    return (out, dout) if derivative else out


def _dyadic_precise(t: TrigPoly, num: int, L: int) -> float:
    """Compensated value at one dyadic point; error about 8 eps * mass."""
    n = t.N
    if n == 0:
        return t.constant
    k = np.arange(1, n + 1, dtype=np.int64)
    r = ((k * np.int64(num)) & ((np.int64(1) << L) - 1)).astype(float)
    arg = r * (TWO_PI / float(1 << L))
    terms = np.concatenate([t.cos * np.cos(arg), t.sin * np.sin(arg)]).tolist()
    terms.append(t.constant)
    return math.fsum(terms)


def _rounding(t: TrigPoly, M: int) -> float:
    """Allowance for FFT and dot-product evaluation error at dyadic points.

    Arguments are reduced exactly, so each term carries O(eps) error; the
    accumulation term is the worst-case bound for a length-N dot product.
    """
    return EPS * t.coefficient_mass() * (t.N + 8.0 * math.log2(max(M, 2)) + 16.0)


def _grid_size(n: int) -> int:
    return 1 << max(6, int(math.ceil(math.log2(8 * max(n, 1)))))


def _max_level(n: int) -> int:
    return 62 - int(n).bit_length()


# ---------------------------------------------------------------------------
# algebra


def _to_complex(t: TrigPoly) -> np.ndarray:
    """Coefficients c_{-N..N} with t = sum c_k e^{ikx}."""
    n = t.N
    c = np.empty(2 * n + 1, dtype=complex)
    c[n] = t.constant
    pos = 0.5 * (t.cos - 1j * t.sin)
    c[n + 1 :] = pos
    c[:n] = np.conj(pos[::-1])
    return c


def _from_complex(c: np.ndarray) -> TrigPoly:
    n = (c.size - 1) // 2
    pos = c[n + 1 :]
    neg = np.conj(c[:n][::-1])
    avg = 0.5 * (pos + neg)  # symmetric by construction; averaging removes nothing exact
    return TrigPoly(c[n].real, 2.0 * avg.real, -2.0 * avg.imag)


def multiply(s: TrigPoly, t: TrigPoly) -> TrigPoly:
    """Coefficients of the pointwise product ``s(x) t(x)``.

    The result has representation degree ``s.N + t.N``. Work is proportional
    to the number of nonzero coefficients of the sparser factor times the
    length of the other one, so products with a few-term factor (Riesz
    factors, ``cos(n x)`` carriers) stay linear.
    """
    cs, ct = _to_complex(s), _to_complex(t)
    nnz_s = np.count_nonzero(cs)
    nnz_t = np.count_nonzero(ct)
    if nnz_s > nnz_t:
        cs, ct = ct, cs
    out = np.zeros(cs.size + ct.size - 1, dtype=complex)
    if nnz_s and nnz_t:
        if min(nnz_s, nnz_t) * 4 < cs.size:
            L = ct.size
            for j in np.flatnonzero(cs):  # ascending, fixed order
                out[j : j + L] += cs[j] * ct
        else:
            out = np.convolve(cs, ct)
    return _from_complex(out)


def dyadic_block(t: TrigPoly, n: int) -> TrigPoly:
    """Frequencies ``2^(n-1) <= k <= 2^n - 1`` of ``t``; ``n = 0`` gives the constant."""
    if n < 0:
        raise ValueError("block index must be nonnegative")
    if n == 0:
        return TrigPoly(t.constant)
    lo = 1 << (n - 1)
    hi = min((1 << n) - 1, t.N)
    if lo > t.N:
        return TrigPoly.zero()
    a = np.zeros(hi)
    b = np.zeros(hi)
    a[lo - 1 : hi] = t.cos[lo - 1 : hi]
    b[lo - 1 : hi] = t.sin[lo - 1 : hi]
    return TrigPoly(0.0, a, b)


def dyadic_blocks(t: TrigPoly) -> list[TrigPoly]:
    """All blocks ``[delta_0, ..., delta_n]`` with ``2^n - 1 >= deg(t)``."""
    d = t.degree
    n = d.bit_length()  # smallest n with 2^n - 1 >= d
    return [dyadic_block(t, j) for j in range(n + 1)]


# ---------------------------------------------------------------------------
# norms


def norm_l2_exact(t: TrigPoly) -> float:
    """L2(0, 2pi) norm by Parseval."""
    s = math.fsum(np.concatenate([t.cos**2, t.sin**2]).tolist())
    return math.sqrt(TWO_PI * t.constant**2 + math.pi * s)


def _global_sup_bound(t: TrigPoly, M: int, vals: np.ndarray, rho: float) -> float:
    # At a maximiser x* of |t|, t'(x*) = 0; the nearest grid node lies within
    # pi/M, so |t(node)| >= ||t|| (1 - N^2 pi^2 / (2 M^2)).
    q = (t.N * math.pi / M) ** 2 / 2.0
    G = float(np.max(np.abs(vals))) + rho
    return min(G / (1.0 - q), t.coefficient_mass())


def _check_tol(tol: float) -> None:
    if not (tol > 0 and math.isfinite(tol)):
        raise ValueError(f"tol must be a positive finite number, got {tol!r}")


def norm_sup(t: TrigPoly, tol: float = 1e-8, max_points: int = DEFAULT_MAX_POINTS) -> NormEnclosure:
    """Certified enclosure of ``max |t(x)|`` with width at most ``tol``.

    Raises :class:`CapExceededError` (carrying the best enclosure reached) if
    more than ``max_points`` evaluations would be needed.
    """
    _check_tol(tol)
    t = t.canonical()
    n = t.N
    if n == 0:
        v = abs(t.constant)
        return NormEnclosure(v, v, math.inf, 1)
    M = _grid_size(n)
    if M > max_points:
        raise CapExceededError(f"sup-norm grid of {M} points exceeds cap {max_points}")
    dt = t.derivative()
    rho, drho = _rounding(t, M), _rounding(dt, M)
    if 2 * rho >= tol:
        raise CapExceededError(f"tol {tol:g} is below the rounding floor {2 * rho:g}")
    vals = _grid(t, M)
    ders = _grid(dt, M)
    U = _global_sup_bound(t, M, vals, rho)
    K = n * n * U

    L = _max_level(n)
    m = M.bit_length() - 1
    half = 1 << (L - m - 1)  # cell half-width in units of 2 pi / 2^L
    centers = np.arange(M, dtype=np.int64) << (L - m)
    absv = np.abs(vals)
    G = float(absv.max())
    w = math.pi / M
    bound = absv + (np.abs(ders) + drho) * w + 0.5 * K * w * w + rho
    settled = -math.inf
    used = M
    while True:
        keep = bound > G + tol - rho
        if not keep.all():
            settled = max(settled, float(bound[~keep].max()))
        if not keep.any():
            break
        centers, kept = centers[keep], bound[keep]
        if used + 2 * centers.size > max_points or half < 2:
            best = NormEnclosure(max(G - rho, 0.0), min(U, max(settled, float(kept.max()))), math.inf, used)
            raise CapExceededError(f"sup-norm refinement exceeds {max_points} evaluations", best)
        half >>= 1
        w *= 0.5
        centers = np.concatenate([centers - half, centers + half])
        v, d = _dyadic(t, centers, L, derivative=True)
        used += centers.size
        av = np.abs(v)
        G = max(G, float(av.max()))
        bound = av + (np.abs(d) + drho) * w + 0.5 * K * w * w + rho
    lower = max(G - rho, 0.0)
    upper = max(min(U, settled), lower)
    return NormEnclosure(float(lower), float(upper), math.inf, int(used))


def norm_l1(t: TrigPoly, tol: float = 1e-8, max_points: int = DEFAULT_MAX_POINTS) -> NormEnclosure:
    """Certified enclosure of ``int_0^{2pi} |t(x)| dx`` with width at most ``tol``.

    Cells on which ``t`` provably keeps one sign are merged into runs whose
    integral is exact through the antiderivative. Cells that may contain a
    zero are bisected; each contributes between 0 and ``width * max|t|``.
    """
    _check_tol(tol)
    t = t.canonical()
    n = t.N
    if n == 0:
        v = TWO_PI * abs(t.constant)
        r = 4 * EPS * v
        return NormEnclosure(max(v - r, 0.0), v + r, 1.0, 1)
    M = _grid_size(n)
    if M > max_points:
        raise CapExceededError(f"L1 grid of {M} points exceeds cap {max_points}")
    k = np.arange(1, n + 1, dtype=float)
    periodic = TrigPoly(0.0, -t.sin / k, t.cos / k)  # F(x) = A x + periodic(x)
    dt = t.derivative()
    rho, drho = _rounding(t, M), _rounding(dt, M)
    frho = 16 * EPS * (periodic.coefficient_mass() + TWO_PI * abs(t.constant))
    U = _global_sup_bound(t, M, _grid(t, M), rho)
    K = n * n * U

    L = _max_level(n)
    m = M.bit_length() - 1
    width = 1 << (L - m)  # cell width in units of 2 pi / 2^L
    starts = np.arange(M, dtype=np.int64) * width
    mid = t.shifted(math.pi / M)
    v, d = _grid(mid, M), _grid(mid.derivative(), M)
    w = math.pi / M  # cell half-width in radians

    settled_start, settled_sign, settled_width = [], [], []
    used = 2 * M
    while True:
        slack = (np.abs(d) + drho) * w + 0.5 * K * w * w + rho
        definite = np.abs(v) > slack
        settled_start.append(starts[definite])
        settled_sign.append(np.sign(v[definite]))
        settled_width.append(np.full(int(definite.sum()), width, dtype=np.int64))
        amb = ~definite
        amb_hi = 2.0 * w * (np.abs(v[amb]) + slack[amb])
        n_amb = int(amb.sum())
        round_est = 2 * frho * (2 * n + 2 * n_amb + 1) + 4 * EPS * TWO_PI * U
        if float(amb_hi.sum()) + 2 * round_est <= tol or n_amb == 0:
            break
        if used + 2 * n_amb > max_points or width < 2:
            raise CapExceededError(f"L1 refinement exceeds {max_points} evaluations")
        starts = starts[amb]
        width >>= 1
        w *= 0.5
        starts = np.concatenate([starts, starts + width])
        v, d = _dyadic(t, starts + width // 2, L, derivative=True)
        used += starts.size

    amb_start = starts[amb]
    all_start = np.concatenate(settled_start + [amb_start])
    all_sign = np.concatenate(settled_sign + [np.zeros(amb_start.size)])
    all_width = np.concatenate(settled_width + [np.full(amb_start.size, width, dtype=np.int64)])
    order = np.argsort(all_start, kind="stable")
    all_start, all_sign, all_width = all_start[order], all_sign[order], all_width[order]

    # Contiguous same-sign definite cells form runs; only run ends need F.
    full = np.int64(1) << L
    A = t.constant
    pieces = []
    runs = 0
    i, total = 0, all_start.size
    while i < total:
        s = all_sign[i]
        j = i
        while j + 1 < total and all_sign[j + 1] == s:
            j += 1
        if s != 0:
            a_num = int(all_start[i])
            b_num = int(all_start[j] + all_width[j])
            Fa = _dyadic_precise(periodic, a_num, L) + A * (TWO_PI * a_num / full)
            Fb = _dyadic_precise(periodic, b_num % int(full), L) + A * (TWO_PI * b_num / full)
            pieces.append(s * (Fb - Fa))
            runs += 1
        i = j + 1
    exact = math.fsum(pieces)
    round_err = 2 * frho * runs + 4 * EPS * TWO_PI * U
    lower = max(exact - round_err, 0.0)
    upper = exact + float(amb_hi.sum()) + round_err
    return NormEnclosure(float(lower), float(max(upper, lower)), 1.0, int(used))


def poly_sum(polys: Sequence[TrigPoly]) -> TrigPoly:
    out = TrigPoly.zero()
    for p in polys:
        out = out + p
    return out
