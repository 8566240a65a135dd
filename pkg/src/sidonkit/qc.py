"""The QC-norm: the average sup norm of sign-randomised dyadic blocks.

    ||f||_QC = int_0^1 || sum_n r_n(w) delta_n(f, .) ||_inf dw

with r_0 = 1, so the constant block is never randomised. Because
(r_1(w), ..., r_B(w)) is uniform on {-1, +1}^B, the integral is an average
over sign patterns, computed either exactly (all 2^B patterns) or by Monte
Carlo.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapExceededError
from .trigpoly import TrigPoly, dyadic_blocks, norm_sup, evaluate

MAX_EXACT_BLOCKS = 14
MAX_OSKOLKOV_N = 20
MAX_LOG_N = 1 << 20
RNG_NAME = "numpy.Philox"
THREADS_ENV = "SIDONKIT_THREADS"


@dataclass(frozen=True)
class QCEstimate:
    value: float
    method: str  # "exact" or "monte_carlo"
    inner_tol: float
    patterns: int
    samples: int | None = None
    std_error: float | None = None
    seed: int | None = None
    rng: str | None = None

    def to_dict(self) -> dict:
        d = {"value": self.value, "method": self.method, "inner_tol": self.inner_tol, "patterns": self.patterns}
        if self.method == "monte_carlo":
            d.update(samples=self.samples, std_error=self.std_error, seed=self.seed, rng=self.rng)
        return d


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _nonzero_blocks(t: TrigPoly):
    blocks = dyadic_blocks(t.canonical())
    base = blocks[0]
    rand = [b for b in blocks[1:] if not b.is_zero()]
    n = max((b.N for b in rand), default=0)
    base = base.padded(n)
    return base, [b.padded(n) for b in rand]


def _stack(blocks: Sequence[TrigPoly]):
    return np.array([b.cos for b in blocks]), np.array([b.sin for b in blocks])


def _signed_sup(base: TrigPoly, C: np.ndarray, S: np.ndarray, signs: np.ndarray, tol: float) -> float:
    # Blocks occupy disjoint frequencies, so the combination is a plain sum.
    poly = TrigPoly(base.constant, base.cos + signs @ C, base.sin + signs @ S)
    return norm_sup(poly, tol).mid


def _sign_matrix(B: int, rows: np.ndarray) -> np.ndarray:
    bits = (rows[:, None] >> np.arange(B)) & 1
    return 1.0 - 2.0 * bits


def parallel_map(fn, items):
    """``[fn(x) for x in items]``, threaded when SIDONKIT_THREADS > 1; order is kept."""
    workers = _threads()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(fn, items))  # map keeps input order


def qc_exact(t: TrigPoly, inner_tol: float = 1e-6) -> QCEstimate:
    """Exact average over all sign patterns of the nonzero blocks.

    Each sup norm is a certified enclosure of width ``<= inner_tol``; the
    average of their midpoints is within ``inner_tol / 2`` of the true value.
    """
    if inner_tol <= 0:
        raise ValueError("inner_tol must be positive")
    base, blocks = _nonzero_blocks(t)
    B = len(blocks)
    if B > MAX_EXACT_BLOCKS:
        raise CapExceededError(
            f"{B} nonzero dyadic blocks exceed the exact cap of {MAX_EXACT_BLOCKS}; use qc_monte_carlo"
        )
    if B == 0:
        return QCEstimate(abs(base.constant), "exact", inner_tol, 1)
    C, S = _stack(blocks)
    total = 1 << B
    # With no constant block, flipping every sign negates the polynomial and
    # leaves its sup norm unchanged, so only half the patterns are evaluated.
    half = base.is_zero()
    rows = np.arange(total // 2 if half else total, dtype=np.int64)
    signs = _sign_matrix(B, rows)
    sups = np.array(parallel_map(lambda s: _signed_sup(base, C, S, s, inner_tol), signs))
    value = float(np.sum(sups) / sups.size)  # numpy's pairwise summation
    return QCEstimate(value, "exact", inner_tol, total)


def qc_pattern_values(t: TrigPoly, inner_tol: float = 1e-6) -> np.ndarray:
    """Sup-norm midpoints for every sign pattern, indexed by pattern bits.

    Bit j of the index set means block j (in increasing frequency order,
    counting only nonzero blocks) carries sign -1.
    """
    base, blocks = _nonzero_blocks(t)
    B = len(blocks)
    if B > MAX_EXACT_BLOCKS:
        raise CapExceededError(f"{B} nonzero blocks exceed the exact cap of {MAX_EXACT_BLOCKS}")
    if B == 0:
        return np.array([abs(base.constant)])
    C, S = _stack(blocks)
    signs = _sign_matrix(B, np.arange(1 << B, dtype=np.int64))
    return np.array([_signed_sup(base, C, S, s, inner_tol) for s in signs])


def qc_monte_carlo(t: TrigPoly, samples: int, seed: int, inner_tol: float = 1e-6) -> QCEstimate:
    """Monte Carlo estimate with ``samples`` independent uniform sign patterns.

    Signs come from ``numpy.random.Generator(Philox(seed))``, a counter-based
    generator, so the same ``(seed, samples)`` reproduces the value bit for bit.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    if inner_tol <= 0:
        raise ValueError("inner_tol must be positive")
    base, blocks = _nonzero_blocks(t)
    B = len(blocks)
    if B == 0:
        v = abs(base.constant)
        return QCEstimate(v, "monte_carlo", inner_tol, 1, samples, 0.0, seed, RNG_NAME)
    rng = np.random.Generator(np.random.Philox(seed))
    signs = 1.0 - 2.0 * rng.integers(0, 2, size=(samples, B))
    C, S = _stack(blocks)
    sups = np.array(parallel_map(lambda s: _signed_sup(base, C, S, s, inner_tol), signs))
    value = float(np.sum(sups) / samples)
    std_error = float(np.std(sups, ddof=1) / math.sqrt(samples))
    return QCEstimate(value, "monte_carlo", inner_tol, 1 << B, samples, std_error, seed, RNG_NAME)


def oskolkov_poly(n: int) -> TrigPoly:
    """``sum_{j=1}^n 2^{1-j} sum_{k=2^{j-1}}^{2^j - 1} cos kx``; its sup norm is t(0) = n."""
    if not 1 <= n <= MAX_OSKOLKOV_N:
        raise CapExceededError(f"oskolkov_poly needs 1 <= n <= {MAX_OSKOLKOV_N}, got {n}")
    a = np.empty((1 << n) - 1)
    for j in range(1, n + 1):
        a[(1 << (j - 1)) - 1 : (1 << j) - 1] = 1.0 / (1 << (j - 1))
    return TrigPoly(0.0, a)


def log_poly(N: int) -> TrigPoly:
    """``sum_{n=1}^N cos(nx) / n``."""
    if not 2 <= N <= MAX_LOG_N:
        raise CapExceededError(f"log_poly needs 2 <= N <= {MAX_LOG_N}, got {N}")
    return TrigPoly(0.0, 1.0 / np.arange(1, N + 1))


@dataclass(frozen=True)
class VariationRow:
    j: int
    lhs: float
    bound: float
    holds: bool


def variation_hypothesis_check(a: Sequence[float]) -> list[VariationRow]:
    """Check ``|a_{2^j-1}| + sum_{k=2^{j-1}}^{2^j-2} |a_k - a_{k+1}| <= 2^-j``.

    ``a[0]`` is a_1. The sum is computed as one correctly rounded ``fsum`` of
    exact signed terms; a boundary tie is settled in rational arithmetic.
    """
    a = [float(v) for v in a]
    L = len(a)
    n = (L + 1).bit_length() - 1
    if L < 1 or (1 << n) - 1 != L:
        raise ValueError(f"length must be 2^n - 1, got {L}")
    rows = []
    for j in range(1, n + 1):
        lo, hi = 1 << (j - 1), (1 << j) - 1  # 1-based indices
        terms = [abs(a[hi - 1])]
        for k in range(lo, hi):
            x, y = a[k - 1], a[k]
            terms += [x, -y] if x >= y else [y, -x]
        lhs = math.fsum(terms)
        bound = 2.0**-j
        holds = lhs <= bound
        if lhs == bound:
            holds = sum(map(Fraction, terms)) <= Fraction(1, 1 << j)
        rows.append(VariationRow(j, lhs, bound, holds))
    return rows


def block_values_at_zero(t: TrigPoly) -> list[float]:
    """``delta_j(t, 0)`` for j >= 1 (sums of the cosine coefficients per block)."""
    out = []
    c = t.canonical().cos
    j = 1
    while (1 << (j - 1)) <= c.size:
        out.append(math.fsum(c[(1 << (j - 1)) - 1 : (1 << j) - 1].tolist()))
        j += 1
    return out


def qc_block_lower_proxy(t: TrigPoly) -> float:
    """``(sum_{j>=1} delta_j(t, 0)^2)^{1/2}``, the constant-free lower proxy."""
    return math.sqrt(math.fsum(v * v for v in block_values_at_zero(t)))


def step_comparison(n: int, signs: Sequence[int], points: int = 1 << 14) -> float:
    """Grid max of ``|t_w - g_w|`` for the Oskolkov polynomial.

    ``t_w = sum_j s_j delta_j`` and ``g_w = sum_j s_j chi_[-pi 2^-j, pi 2^-j]``
    on the circle. Diagnostic only: no bound is asserted.
    """
    if len(signs) != n:
        raise ValueError("need one sign per block")
    blocks = dyadic_blocks(oskolkov_poly(n))[1:]
    x = np.arange(points) * (2 * math.pi / points)
    xc = np.minimum(x, 2 * math.pi - x)  # distance to 0 on the circle
    tw = np.zeros(points)
    gw = np.zeros(points)
    for j, (s, blk) in enumerate(zip(signs, blocks), start=1):
        tw += s * evaluate(blk, x)
        gw += s * (xc <= math.pi / (1 << j))
    return float(np.max(np.abs(tw - gw)))
