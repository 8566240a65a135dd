"""Brute-force reference computations, written independently of the package.

Nothing here imports sidonkit internals: polynomials are plain coefficient
lists, sup norms come from a dense complex FFT grid polished with a bounded
scalar optimizer, products of cosines are evaluated in multiprecision,
and every discrete quantity is enumerated with Fractions.
These are slow and meant only for small cases and for generating goldens.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize_scalar


def direct_eval(A, a, b, x):
    """A + sum a_k cos kx + b_k sin kx at scalar x, term by term."""
    k = np.arange(1, len(a) + 1)
    return A + float(np.dot(a, np.cos(k * x)) + np.dot(b, np.sin(k * x)))


def sup_oracle(A, a, b=None, grid=1 << 16):
    """max |t| from a dense grid plus local polishing of the best cells."""
    a = np.asarray(a, dtype=float)
    b = np.zeros_like(a) if b is None else np.asarray(b, dtype=float)
    N = len(a)
    M = max(grid, 16 * N)
    c = np.zeros(M, dtype=complex)
    c[0] = A
    c[1 : N + 1] = 0.5 * (a - 1j * b)
    c[M - N :] = (0.5 * (a + 1j * b))[::-1]
    vals = np.abs((np.fft.ifft(c) * M).real)  # t(2 pi j / M)
    h = 2 * math.pi / M
    best = float(vals.max())
    for i in np.argsort(vals)[-6:]:
        x0 = i * h
        res = minimize_scalar(
            lambda x: -abs(direct_eval(A, a, b, x)), bounds=(x0 - h, x0 + h), method="bounded", options={"xatol": 1e-13}
        )
        best = max(best, float(-res.fun))
    return best


def l1_oracle(A, a, b, grid=20001):
    """int_0^{2pi} |t| by locating sign changes with brentq, then the antiderivative."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = np.arange(1, len(a) + 1)

    def F(x):
        return A * x + float(np.sum(a * np.sin(k * x) / k - b * np.cos(k * x) / k))

    xs = np.linspace(0, 2 * math.pi, grid)
    v = [direct_eval(A, a, b, x) for x in xs]
    pts = [0.0]
    for i in range(len(xs) - 1):
        if v[i] * v[i + 1] < 0:
            pts.append(brentq(lambda x: direct_eval(A, a, b, x), xs[i], xs[i + 1], xtol=1e-15))
    pts.append(2 * math.pi)
    return math.fsum(abs(F(hi) - F(lo)) for lo, hi in zip(pts, pts[1:]))


def blocks_of(a):
    """Split cosine coefficients a_1..a_N into dyadic blocks [2^{j-1}, 2^j)."""
    out = []
    j = 1
    while (1 << (j - 1)) <= len(a):
        blk = np.zeros(len(a))
        lo, hi = 1 << (j - 1), min((1 << j) - 1, len(a))
        blk[lo - 1 : hi] = a[lo - 1 : hi]
        if np.any(blk):
            out.append(blk)
        j += 1
    return out


def qc_oracle(a, A=0.0):
    """Average over all 2^B sign patterns of the sup norm (cosine polynomials)."""
    a = np.asarray(a, dtype=float)
    blocks = blocks_of(a)
    total = 0.0
    count = 0
    for signs in itertools.product((1, -1), repeat=len(blocks)):
        coef = sum(s * blk for s, blk in zip(signs, blocks))
        total += sup_oracle(A, coef)
        count += 1
    return float(total / count)


def oskolkov_coeffs(n):
    a = []
    for j in range(1, n + 1):
        a += [2.0 ** (1 - j)] * (1 << (j - 1))
    return a


def logcos_coeffs(N):
    return [1.0 / k for k in range(1, N + 1)]


def block_sums_at_zero(a):
    """delta_j(f, 0) for cosine coefficients, with exact rational sums."""
    return [float(sum(Fraction(v) for v in blk if v)) for blk in blocks_of(a)]


# -- Rademacher / Walsh --------------------------------------------------------


def rademacher_at(n, x: Fraction) -> int:
    """r_n(x) = sign sin(2^n pi x) at an interior point (not a dyadic endpoint)."""
    if n == 0:
        return 1
    return 1 if math.floor(x * (1 << n)) % 2 == 0 else -1


def tail_measure_oracle(a, lam):
    """mes{|sum a_j r_j| > lam ||a||_2} by evaluating at every cell midpoint."""
    n = len(a)
    fa = [Fraction(v) for v in a]
    q = sum(v * v for v in fa)
    lam2 = Fraction(lam) ** 2
    hits = 0
    for i in range(1 << n):
        x = Fraction(2 * i + 1, 1 << (n + 1))
        s = sum(v * rademacher_at(j + 1, x) for j, v in enumerate(fa))
        hits += s * s > lam2 * q
    return Fraction(hits, 1 << n)


def walsh_at(n, x: Fraction) -> int:
    v = 1
    k = 0
    while n >> k:
        if (n >> k) & 1:
            v *= rademacher_at(k + 1, x)
        k += 1
    return v


def walsh_sidon_oracle(l, n_seq, p):
    """(sup, sum ||p_k||_1) for f = sum_{k=l+1}^m p_k w_{n_k}, by midpoints."""
    m = len(n_seq)
    res = m  # every function involved is constant on cells of width 2^-m
    cells = [Fraction(2 * i + 1, 1 << (res + 1)) for i in range(1 << res)]
    sup = Fraction(0)
    l1 = [Fraction(0)] * len(p)
    for x in cells:
        fx = Fraction(0)
        for idx, k in enumerate(range(l + 1, m + 1)):
            pk = sum(Fraction(c) * walsh_at(j, x) for j, c in enumerate(p[idx]))
            l1[idx] += abs(pk)
            fx += pk * walsh_at(n_seq[k - 1], x)
        sup = max(sup, abs(fx))
    return sup, sum(l1) / len(cells)


# -- algebra and matrices ---------------------------------------------------------


def product_to_sum(A1, a1, b1, A2, a2, b2):
    """Coefficients of the product via cos/sin product-to-sum identities."""
    N = len(a1) + len(a2)
    a = [0.0] * (N + 1)
    b = [0.0] * (N + 1)
    f1 = [(0, A1, 0.0)] + [(k + 1, a1[k], b1[k]) for k in range(len(a1))]
    f2 = [(0, A2, 0.0)] + [(k + 1, a2[k], b2[k]) for k in range(len(a2))]
    A = 0.0
    for j, cj, sj in f1:
        for k, ck, sk in f2:
            # (cj cos jx + sj sin jx)(ck cos kx + sk sin kx)
            terms = [
                (j + k, 0.5 * (cj * ck - sj * sk), 0.5 * (cj * sk + sj * ck)),
                (abs(j - k), 0.5 * (cj * ck + sj * sk), 0.5 * (sj * ck - cj * sk) * (1 if j >= k else -1)),
            ]
            if j == 0 or k == 0:
                terms = [(j + k, cj * ck, cj * sk + sj * ck)]
            for f, c, s in terms:
                if f == 0:
                    A += c
                else:
                    a[f] += c
                    b[f] += s
    return A, a[1:], b[1:]


def riesz_pointwise(seq, x, dps=40):
    """prod (1 + cos n_k x) in multiprecision at each float x."""
    with mpmath.workdps(dps):
        return np.array([float(mpmath.fprod(1 + mpmath.cos(n * mpmath.mpf(float(v))) for n in seq)) for v in x])


def int_matmul_is_nI(H) -> bool:
    n = len(H)
    for i in range(n):
        for j in range(n):
            s = sum(H[i][k] * H[j][k] for k in range(n))
            if s != (n if i == j else 0):
                return False
    return True


def legendre_oracle(a, p):
    """Quadratic character by listing the squares mod p."""
    a %= p
    if a == 0:
        return 0
    return 1 if a in {(x * x) % p for x in range(1, p)} else -1
