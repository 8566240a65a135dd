"""Exact finite Rademacher machinery.

On (0, 1) the functions r_1, ..., r_n are constant on the dyadic cells of
width 2^-n and the vector (r_1(x), ..., r_n(x)) runs through every sign
pattern in {-1, +1}^n on exactly one cell. Integrals of functions of
r_1..r_n are therefore averages over sign patterns, which is what every
routine here computes.

Coefficient vectors are first mapped to integers on a common dyadic grid
(every float is a dyadic rational) and divided by their gcd. When the result
fits comfortably in int64 all sums are exact integers; otherwise the code
falls back to float sums and says so through ``SignDistribution.exact``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import CapExceededError

DEFAULT_CAP = 24
_INT_LIMIT = 1 << 52  # keep |sums| exactly representable as floats too


def rademacher_value(n: int, x) -> int:
    """r_n(x) on [0, 1], with r_n = 0 at the endpoints i / 2^n (r_0 = 1 inside).

    ``x`` may be a float, int or Fraction; cell membership is decided exactly.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    fx = Fraction(x)
    if not 0 <= fx <= 1:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    y = fx * (1 << n)
    if y.denominator == 1:
        return 0
    i = math.floor(y) + 1  # x lies in ((i-1)/2^n, i/2^n)
    return 1 if i % 2 == 1 else -1


def cell_values(n: int, resolution: int | None = None) -> np.ndarray:
    """Values of r_n on the 2^resolution open dyadic cells (resolution >= n)."""
    m = n if resolution is None else resolution
    if m < n:
        raise ValueError("resolution must be at least n")
    if n == 0:
        return np.ones(1 << m, dtype=np.int64)
    i = np.arange(1 << m, dtype=np.int64)
    # cell i at resolution m sits inside cell i >> (m - n) at resolution n
    return np.where(((i >> (m - n)) & 1) == 0, 1, -1).astype(np.int64)


def _integerize(a: Sequence[float]):
    """Map a to integers z with a = z * unit; returns (z, unit) or None."""
    fr = [Fraction(float(v)) for v in a]
    den = reduce(lambda x, y: x * y // math.gcd(x, y), (f.denominator for f in fr), 1)
    z = [int(f * den) for f in fr]
    g = reduce(math.gcd, z, 0)
    if g == 0:
        return [0] * len(z), Fraction(1)
    z = [v // g for v in z]
    if sum(abs(v) for v in z) >= _INT_LIMIT:
        return None
    return z, Fraction(g, den)


@dataclass(frozen=True)
class SignDistribution:
    """Exact law of ``sum_j a_j eps_j`` for uniform signs ``eps``.

    ``values`` are sorted and distinct; ``counts[i]`` patterns out of ``2^n``
    take ``values[i]``. When ``exact`` is true, ``int_values * unit`` are the
    exact support points.
    """

    n: int
    values: np.ndarray
    counts: np.ndarray
    exact: bool
    int_values: np.ndarray | None = field(default=None, repr=False)
    unit: Fraction = Fraction(1)

    @property
    def support(self) -> list[tuple[float, Fraction]]:
        total = 1 << self.n
        return [(float(v), Fraction(int(c), total)) for v, c in zip(self.values, self.counts)]

    def total_measure(self) -> Fraction:
        return Fraction(int(self.counts.sum()), 1 << self.n)


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise CapExceededError(
            f"exact enumeration over 2^{n} sign patterns exceeds the cap of {cap} coefficients; "
            "use a Monte Carlo estimate instead"
        )


def _merge(values: np.ndarray, counts: np.ndarray):
    order = np.argsort(values, kind="stable")
    v, c = values[order], counts[order]
    starts = np.flatnonzero(np.concatenate([[True], v[1:] != v[:-1]]))
    return v[starts], np.add.reduceat(c, starts)


def exact_sum_distribution(a: Sequence[float], cap: int = DEFAULT_CAP) -> SignDistribution:
    """Exact distribution of ``sum a_j r_j`` over (0, 1)."""
    a = [float(v) for v in a]
    n = len(a)
    _check_cap(n, cap)
    ints = _integerize(a)
    if ints is not None:
        z, unit = ints
        vals = np.zeros(1, dtype=np.int64)
        steps = z
    else:
        unit = Fraction(1)
        vals = np.zeros(1)
        steps = a
    counts = np.ones(1, dtype=np.int64)
    for s in steps:
        vals, counts = _merge(np.concatenate([vals - s, vals + s]), np.concatenate([counts, counts]))
    if ints is not None:
        return SignDistribution(n, vals.astype(float) * float(unit), counts, True, vals, unit)
    return SignDistribution(n, vals, counts, False)


@dataclass(frozen=True)
class TailReport:
    measure: Fraction
    bound: float
    holds: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "measure": f"{self.measure.numerator}/{self.measure.denominator}",
            "measure_float": float(self.measure),
            "bound": self.bound,
            "holds": self.holds,
            "threshold": self.threshold,
        }


def khintchine_tail_check(a: Sequence[float], lam: float, cap: int = DEFAULT_CAP) -> TailReport:
    """``mes{ |sum a_j r_j| > lam ||a||_2 }`` against ``2 exp(-lam^2 / 2)``.

    The inequality is strict, so support points sitting exactly on the
    threshold are not counted.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    dist = exact_sum_distribution(a, cap)
    total = 1 << dist.n
    if dist.exact:
        z = dist.int_values
        q = sum(int(v) ** 2 for v in _integerize(a)[0])
        lam_f = Fraction(lam)
        # |S| > lam sqrt(q)  <=>  S^2 > lam^2 q  (both sides nonnegative)
        thr2 = lam_f * lam_f * q
        approx = float(lam) * math.sqrt(q)
        big = np.abs(z.astype(float)) > approx * (1 + 1e-9) + 1
        small = np.abs(z.astype(float)) < approx * (1 - 1e-9) - 1
        count = int(dist.counts[big].sum())
        for v, c in zip(z[~big & ~small], dist.counts[~big & ~small]):
            if int(v) ** 2 > thr2:
                count += int(c)
        threshold = approx * float(dist.unit)
    else:
        threshold = lam * math.sqrt(math.fsum(v * v for v in a))
        count = int(dist.counts[np.abs(dist.values) > threshold].sum())
    measure = Fraction(count, total)
    bound = 2.0 * math.exp(-lam * lam / 2.0)
    return TailReport(measure, bound, float(measure) <= bound, threshold)


def _prepare(a: Sequence[float], cap: int):
    a = [float(v) for v in a]
    if not a or all(v == 0 for v in a):
        raise ValueError("coefficient vector must not be zero")
    _check_cap(len(a), cap)
    return a, _integerize(a)


def _norm(a, ints) -> float:
    if ints is not None:
        return math.sqrt(sum(v * v for v in ints[0]))
    return math.sqrt(math.fsum(v * v for v in a))


def _exact_mean(weights: np.ndarray, counts: np.ndarray | None, n: int) -> float:
    """Mean of integer data over 2^n patterns as one exact sum, rounded once."""
    w = weights.astype(object)
    total = int(np.sum(w if counts is None else w * counts.astype(object)))
    return float(Fraction(total, 1 << n))


def khintchine_l1_ratio(a: Sequence[float], cap: int = DEFAULT_CAP) -> float:
    """``int_0^1 |sum a_j r_j| dx / ||a||_2``."""
    a, ints = _prepare(a, cap)
    dist = exact_sum_distribution(a, cap)
    if ints is not None:
        return _exact_mean(np.abs(dist.int_values), dist.counts, dist.n) / _norm(a, ints)
    mean = math.fsum((np.abs(dist.values) * dist.counts).tolist()) / (1 << dist.n)
    return mean / _norm(a, ints)


def max_partial_ratio(a: Sequence[float], cap: int = DEFAULT_CAP) -> float:
    """``int_0^1 max_k |sum_{j<=k} a_j r_j| dx / ||a||_2``, by full enumeration."""
    a, ints = _prepare(a, cap)
    if ints is not None:
        steps, dtype = ints[0], np.int64
    else:
        steps, dtype = a, float
    s = np.zeros(1, dtype=dtype)
    best = np.zeros(1, dtype=dtype)
    for v in steps:
        s = np.concatenate([s - v, s + v])
        best = np.concatenate([best, best])
        np.maximum(best, np.abs(s), out=best)
    n = len(a)
    if ints is not None:
        return _exact_mean(best, None, n) / _norm(a, ints)
    return math.fsum(best.tolist()) / (1 << n) / _norm(a, ints)


def independence_check(n_funcs: int, intervals) -> tuple[Fraction, Fraction]:
    """Joint measure and product of marginals for ``r_n(x) in I_n``.

    ``intervals`` is a list of ``(lo, hi)`` closed intervals, one per
    r_1..r_N. Computed by exact counting on the 2^N open cells.
    """
    N = n_funcs
    cells = 1 << N
    joint = np.ones(cells, dtype=bool)
    product = Fraction(1)
    for n, (lo, hi) in zip(range(1, N + 1), intervals):
        inside = (cell_values(n, N) >= lo) & (cell_values(n, N) <= hi)
        joint &= inside
        product *= Fraction(int(inside.sum()), cells)
    return Fraction(int(joint.sum()), cells), product


def inner_product(n: int, m: int) -> Fraction:
    """Exact ``int_0^1 r_n r_m dx``."""
    res = max(n, m)
    return Fraction(int((cell_values(n, res) * cell_values(m, res)).sum()), 1 << res)
