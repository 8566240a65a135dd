"""Exact step functions on [0, 1], the Walsh system and discrete Sidon checks.

A step function is stored as integer numerators over a common positive
denominator, one value per open cell ((i-1)/L, i/L). Values at the cell
endpoints have measure zero and are never stored. Two step functions on
different grids are compared on the least common refinement, so every
result here is an exact rational.

Numerators are kept as int64 whenever products and sums provably fit;
otherwise the arrays switch to Python integers (object dtype).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

from .errors import CapExceededError, HypothesisError

MAX_WALSH_INDEX = 1 << 20
MAX_CELLS = 1 << 22
_SAFE = 1 << 62
_EXACT_FLOAT = 1 << 53


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _maxabs(a: np.ndarray) -> int:
    return int(max(abs(int(a.max())), abs(int(a.min())))) if a.size else 0


def _compact(a: np.ndarray) -> np.ndarray:
    """int64 if every entry fits comfortably, else Python ints."""
    if a.dtype == np.int64:
        return a
    if a.size == 0 or _maxabs(a) < _SAFE:
        return a.astype(np.int64)
    return a.astype(object)


def _big(a: np.ndarray) -> np.ndarray:
    return a.astype(object) if a.dtype != object else a


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and _maxabs(a) * _maxabs(b) < _SAFE:
        return a * b
    return _compact(_big(a) * _big(b))


def _add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and _maxabs(a) + _maxabs(b) < _SAFE:
        return a + b
    return _compact(_big(a) + _big(b))


def _dot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact integer matrix product."""
    inner = A.shape[-1]
    if A.dtype == np.int64 and B.dtype == np.int64 and _maxabs(A) * _maxabs(B) * max(inner, 1) < _EXACT_FLOAT:
        # every partial sum is an integer below 2^53, so BLAS is exact
        return (A.astype(float) @ B.astype(float)).astype(np.int64)
    if A.dtype == np.int64 and B.dtype == np.int64 and _maxabs(A) * _maxabs(B) * max(inner, 1) < _SAFE:
        return A @ B
    return _compact(np.dot(_big(A), _big(B)))


def _common_fractions(values) -> tuple[np.ndarray, int]:
    fr = [Fraction(v) if not isinstance(v, str) else Fraction(v.strip()) for v in values]
    den = reduce(_lcm, (f.denominator for f in fr), 1)
    nums = np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object)
    return _compact(nums), den


@dataclass(frozen=True, eq=False)
class StepFunction:
    """``values[i] / den`` on the i-th of ``cells`` equal open cells."""

    values: np.ndarray
    den: int = 1

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("values must be a nonempty 1-d array")
        if v.dtype.kind == "f":
            raise TypeError("use StepFunction.from_values for non-integer data")
        if self.den <= 0:
            raise ValueError("den must be positive")
        if v.size > MAX_CELLS:
            raise CapExceededError(f"{v.size} cells exceed the cap of {MAX_CELLS}")
        v = _compact(v.astype(object) if v.dtype != np.int64 else v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "den", int(self.den))

    @classmethod
    def from_values(cls, values: Sequence) -> "StepFunction":
        """From exact values (ints, Fractions, "p/q" strings or floats taken exactly)."""
        nums, den = _common_fractions(values)
        return cls(nums, den)

    @classmethod
    def constant(cls, c=1, cells: int = 1) -> "StepFunction":
        f = Fraction(c)
        return cls(np.full(cells, f.numerator, dtype=object), f.denominator)

    @property
    def cells(self) -> int:
        return self.values.size

    @property
    def resolution(self) -> int | None:
        """m with cells = 2^m, or None for a non-dyadic grid."""
        c = self.cells
        return c.bit_length() - 1 if c & (c - 1) == 0 else None

    def fractions(self) -> list[Fraction]:
        return [Fraction(int(v), self.den) for v in self.values]

    def refine(self, cells: int) -> "StepFunction":
        """Same function on a finer grid (``cells`` a multiple of the current count)."""
        if cells % self.cells:
            raise ValueError(f"{cells} is not a multiple of {self.cells}")
        return StepFunction(np.repeat(self.values, cells // self.cells), self.den)

    def is_constant_on(self, parts: int) -> bool:
        """True iff constant on each of the ``parts`` equal open subintervals."""
        L = _lcm(self.cells, parts)
        v = self.refine(L).values.reshape(parts, L // parts)
        return bool(np.all(v == v[:, :1]))

    def _pair(self, other: "StepFunction"):
        L = _lcm(self.cells, other.cells)
        return self.refine(L), other.refine(L)

    def __add__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        a, b = self._pair(other)
        den = _lcm(a.den, b.den)
        va = _mul(a.values, np.array([den // a.den], dtype=object))
        vb = _mul(b.values, np.array([den // b.den], dtype=object))
        return StepFunction(_add(va, vb), den)

    def __neg__(self):
        return StepFunction(-self.values, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            a, b = self._pair(other)
            return StepFunction(_mul(a.values, b.values), a.den * b.den)
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, c) -> "StepFunction":
        f = Fraction(c)
        return StepFunction(_mul(self.values, np.array([f.numerator], dtype=object)), self.den * f.denominator)

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        a, b = self._pair(other)
        return bool(np.array_equal(_big(a.values) * b.den, _big(b.values) * a.den))

    __hash__ = None

    def sup(self) -> Fraction:
        return Fraction(_maxabs(self.values), self.den)

    def integral(self) -> Fraction:
        return Fraction(int(np.sum(_big(self.values))), self.den * self.cells)

    def __repr__(self):
        return f"StepFunction(cells={self.cells}, den={self.den})"


def step_integrate(f: StepFunction, g: StepFunction | None = None, mode: str = "inner") -> Fraction:
    """Exact integrals over [0, 1].

    ``inner``: int f g (g defaults to 1); ``l1``: int |f|; ``sup``: max |f|;
    ``l2sq``: int f^2, the squared L2 norm.
    """
    if mode == "inner":
        return (f if g is None else f * g).integral()
    if mode == "l1":
        return Fraction(int(np.sum(np.abs(_big(f.values)))), f.den * f.cells)
    if mode == "sup":
        return f.sup()
    if mode == "l2sq":
        return (f * f).integral()
    raise ValueError(f"unknown mode {mode!r}")


def _walsh_values(n: int, m: int) -> np.ndarray:
    """w_n on the 2^m dyadic cells: (-1)^(sum_k theta_k(n) bit_{m-1-k}(i))."""
    i = np.arange(1 << m, dtype=np.int64)
    parity = np.zeros(1 << m, dtype=np.int64)
    k = 0
    while n >> k:
        if (n >> k) & 1:
            # r_{k+1} is -1 exactly where digit k+1 of x (bit m-1-k of i) is 1
            parity ^= (i >> (m - 1 - k)) & 1
        k += 1
    return 1 - 2 * parity


def walsh_function(n: int) -> StepFunction:
    """w_n at resolution s(n) + 1 (one cell for w_0)."""
    if not 0 <= n <= MAX_WALSH_INDEX:
        raise CapExceededError(f"Walsh index must lie in [0, {MAX_WALSH_INDEX}], got {n}")
    if n == 0:
        return StepFunction(np.ones(1, dtype=np.int64))
    return StepFunction(_walsh_values(n, n.bit_length()))


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Finite prefix phi_1..phi_K of an orthonormal step-function system.

    ``m_seq`` holds the block boundaries m_1 = 1 < m_2 < ...; ``M_bound`` is
    the exact max of sup norms over the stored functions.
    """

    functions: tuple[StepFunction, ...]
    m_seq: tuple[int, ...]
    M_bound: Fraction = field(default=None)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "m_seq", tuple(int(v) for v in self.m_seq))
        if not self.functions:
            raise ValueError("system needs at least one function")
        m = self.m_seq
        if not m or m[0] != 1 or any(b <= a for a, b in zip(m, m[1:])):
            raise ValueError("m_seq must be increasing with m_1 = 1")
        object.__setattr__(self, "M_bound", max(f.sup() for f in self.functions))
        object.__setattr__(self, "_cache", {})

    def __len__(self):
        return len(self.functions)

    @property
    def cells(self) -> int:
        return reduce(_lcm, (f.cells for f in self.functions), 1)

    def matrix(self, count: int | None = None, cells: int | None = None) -> tuple[np.ndarray, int, int]:
        """(V, den, L): numerators of phi_1..phi_count on L common cells."""
        count = len(self) if count is None else count
        L = self.cells if cells is None else cells
        key = (count, L)
        if key not in self._cache:
            fs = [f.refine(L) for f in self.functions[:count]]
            den = reduce(_lcm, (f.den for f in fs), 1)
            rows = [_mul(f.values, np.array([den // f.den], dtype=np.int64)) for f in fs]
            V = np.array(rows, dtype=object) if any(r.dtype == object for r in rows) else np.array(rows)
            self._cache[key] = (_compact(V), den, L)
        return self._cache[key]

    def refined(self, factor: int) -> "DiscreteSystem":
        L = self.cells * factor
        return DiscreteSystem(tuple(f.refine(L) for f in self.functions), self.m_seq, name=self.name)

    def to_json(self) -> dict:
        L = self.cells
        return {
            "m_seq": list(self.m_seq),
            "cells": L,
            "functions": [[str(v) for v in f.refine(L).fractions()] for f in self.functions],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DiscreteSystem":
        L = int(data["cells"])
        funcs = []
        for j, row in enumerate(data["functions"], start=1):
            if len(row) != L:
                raise ValueError(f"function {j} has {len(row)} values, expected {L}")
            funcs.append(StepFunction.from_values(row))
        return cls(tuple(funcs), tuple(data["m_seq"]), name=data.get("name", "file"))


def load_system(path) -> DiscreteSystem:
    with open(path) as fh:
        return DiscreteSystem.from_json(json.load(fh))


def dump_system(system: DiscreteSystem, path) -> None:
    with open(path, "w") as fh:
        json.dump(system.to_json(), fh, indent=1)


@lru_cache(maxsize=8)
def walsh_system(count: int) -> DiscreteSystem:
    """phi_k = w_{k-1}, k = 1..count, with m_k = 2^{k-1} (all m_k <= count)."""
    if not 1 <= count <= MAX_WALSH_INDEX:
        raise CapExceededError(f"count must lie in [1, {MAX_WALSH_INDEX}]")
    m = max(1, (count - 1).bit_length())
    funcs = tuple(StepFunction(_walsh_values(k, m)) for k in range(count))
    m_seq = tuple(1 << j for j in range(count.bit_length()) if (1 << j) <= count)
    return DiscreteSystem(funcs, m_seq, name="walsh")


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    counterexample: tuple | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"passed": self.passed, "counterexample": self.counterexample, "detail": self.detail}


@dataclass(frozen=True)
class SystemReport:
    prefix: int
    phi1: ConditionResult
    orthonormal: ConditionResult
    cell_constant: ConditionResult  # condition 1
    square_orthogonal: ConditionResult  # condition 2
    M: Fraction  # condition 3, the finite-prefix sup

    @property
    def passed(self) -> bool:
        return self.phi1.passed and self.orthonormal.passed and self.cell_constant.passed and self.square_orthogonal.passed

    def failures(self) -> list[str]:
        names = ["phi1", "orthonormal", "cell_constant", "square_orthogonal"]
        return [n for n in names if not getattr(self, n).passed]

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "phi1": self.phi1.to_dict(),
            "orthonormal": self.orthonormal.to_dict(),
            "condition1": self.cell_constant.to_dict(),
            "condition2": self.square_orthogonal.to_dict(),
            "condition3": {"M": str(self.M)},
            "passed": self.passed,
        }


def verify_system_conditions(system: DiscreteSystem, prefix: int | None = None) -> SystemReport:
    """Check phi_1 = 1, orthonormality and conditions 1)-3) on phi_1..phi_prefix.

    Counterexamples are 1-based: (j, k) for condition 1 (phi_j not constant
    on the m_k grid), (n, j) for condition 2 and orthonormality.
    """
    K = len(system) if prefix is None else prefix
    if not 1 <= K <= len(system):
        raise ValueError(f"prefix must lie in [1, {len(system)}]")
    V, den, L = system.matrix(K)

    phi1 = ConditionResult(True)
    if not np.all(V[0] == den):
        phi1 = ConditionResult(False, (1,), "phi_1 is not identically 1")

    G = _dot(V, V.T)  # exact Gram matrix times den^2 L
    target = den * den * L
    bad = np.argwhere(G != target * np.eye(K, dtype=np.int64))
    if bad.size:
        n, j = (int(v) + 1 for v in bad[0])
        ortho = ConditionResult(False, (n, j), f"<phi_{n}, phi_{j}> = {Fraction(int(G[n-1, j-1]), target)}")
    else:
        ortho = ConditionResult(True)

    cond1 = ConditionResult(True)
    for k, mk in enumerate(system.m_seq, start=1):
        for j in range(1, min(mk, K) + 1):
            if not system.functions[j - 1].is_constant_on(mk):
                cond1 = ConditionResult(False, (j, k), f"phi_{j} is not constant on cells of width 1/{mk}")
                break
        if not cond1.passed:
            break

    cond2 = ConditionResult(True)
    # For each n the binding constraint comes from the largest m_k < n (k >= 2).
    inner_m = [mk for mk in system.m_seq[1:] if mk < K]
    if inner_m:
        J = max(inner_m)
        S = _mul(V, V)
        P = _dot(S, V[:J].T)  # P[n-1, j-1] = den^3 L int phi_n^2 phi_j
        for n in range(system.m_seq[1] + 1, K + 1):
            Jn = max(mk for mk in system.m_seq[1:] if mk < n)
            row = P[n - 1, 1:Jn]
            nz = np.flatnonzero(row != 0)
            if nz.size:
                j = int(nz[0]) + 2
                cond2 = ConditionResult(False, (n, j), f"int phi_{n}^2 phi_{j} != 0")
                break

    M = max(f.sup() for f in system.functions[:K])
    return SystemReport(K, phi1, ortho, cond1, cond2, M)


@dataclass(frozen=True)
class SidonReport:
    sup: Fraction
    rhs: Fraction  # sum_k ||p_k||_1
    M: Fraction
    holds: bool
    ratio: Fraction | None  # sup / rhs

    def to_dict(self) -> dict:
        return {
            "sup": str(self.sup),
            "rhs": str(self.rhs),
            "M": str(self.M),
            "holds": self.holds,
            "ratio": None if self.ratio is None else str(self.ratio),
        }


def _coef_rows(p: Sequence[Sequence], width: int) -> tuple[np.ndarray, int]:
    flat, shape = [], []
    for row in p:
        row = list(row)
        if len(row) > width:
            raise HypothesisError("p_k in Phi(m_l)", f"{len(row)} coefficients but m_l = {width}")
        flat += row + [0] * (width - len(row))
    nums, den = _common_fractions(flat) if flat else (np.zeros(0, dtype=np.int64), 1)
    return nums.reshape(len(p), width), den


def _sidon_core(V: np.ndarray, den: int, L: int, rows: list[int], C: np.ndarray, cden: int, width: int, M: Fraction):
    P = _dot(C, V[:width])  # p_k numerators, denominator cden * den
    F = _mul(P, V[rows])  # denominator cden * den^2
    f = np.sum(_big(F), axis=0) if F.dtype == object else _sum64(F)
    sup = Fraction(_maxabs(f), cden * den * den)
    rhs = Fraction(int(np.sum(_big(np.abs(P)))) if P.dtype == object else int(np.abs(P).sum()), cden * den * L)
    ratio = sup / rhs if rhs else None
    return SidonReport(sup, rhs, M, sup * M >= rhs, ratio)


def _sum64(F: np.ndarray) -> np.ndarray:
    if _maxabs(F) * F.shape[0] < _SAFE:
        return F.sum(axis=0)
    return np.sum(_big(F), axis=0)


def discrete_sidon_check(
    system: DiscreteSystem, n_seq: Sequence[int], l: int, N: int, p: Sequence[Sequence], m_seq: Sequence[int] | None = None
) -> SidonReport:
    """Exact check of ``||f||_inf >= (1/M) sum_{k=l+1}^N ||p_k||_1``.

    ``f = sum_{k=l+1}^N p_k phi_{n_k}``. ``n_seq[k-1]`` is n_k (at least the
    first N terms), ``p[k-l-1]`` holds the coefficients of p_k over
    phi_1..phi_{m_l}. Hypothesis violations raise ``HypothesisError``.
    """
    m = tuple(system.m_seq if m_seq is None else m_seq)
    n = [int(v) for v in n_seq]
    if l < 1 or N < l + 1:
        raise HypothesisError("indices", f"need l >= 1 and N >= l + 1, got l = {l}, N = {N}")
    if len(m) < N:
        raise HypothesisError("m_seq", f"m_seq has {len(m)} terms, needs N = {N}")
    if len(n) < N:
        raise HypothesisError("n_seq", f"n_seq has {len(n)} terms, needs N = {N}")
    if n[0] != 1:
        raise HypothesisError("n_1 = 1", f"n_1 = {n[0]}")
    for k in range(2, N + 1):
        if not m[k - 2] < n[k - 1] <= m[k - 1]:
            raise HypothesisError("m_{k-1} < n_k <= m_k", f"k = {k}: n_k = {n[k-1]} not in ({m[k-2]}, {m[k-1]}]")
    if len(p) != N - l:
        raise HypothesisError("p_k count", f"need {N - l} envelopes for k = l+1..N, got {len(p)}")
    width = m[l - 1]
    need = max(max(n[l:N]), width)
    if need > len(system):
        raise HypothesisError("system length", f"needs phi_{need}, system has {len(system)}")
    V, den, L = system.matrix(need)
    C, cden = _coef_rows(p, width)
    return _sidon_core(V, den, L, [n[k - 1] - 1 for k in range(l + 1, N + 1)], C, cden, width, system.M_bound)


def walsh_sidon_check(l: int, n_seq: Sequence[int], p: Sequence[Sequence]) -> SidonReport:
    """The Walsh form: ``||sum_{k=l+1}^m p_k w_{n_k}||_inf >= sum ||p_k||_1``.

    ``n_seq[k-1]`` is n_k with ``2^{k-1} <= n_k < 2^k`` (k = 1..m, m =
    len(n_seq)); ``p[k-l-1]`` holds coefficients over w_0..w_{2^l - 1}.
    Reduces to ``discrete_sidon_check`` with phi_k = w_{k-1}, m_k = 2^{k-1},
    theorem indices shifted by one.
    """
    n = [int(v) for v in n_seq]
    m = len(n)
    if l < 0 or m < l + 1:
        raise HypothesisError("indices", f"need l >= 0 and m >= l + 1, got l = {l}, m = {m}")
    for k, nk in enumerate(n, start=1):
        if not (1 << (k - 1)) <= nk < (1 << k):
            raise HypothesisError("2^{k-1} <= n_k < 2^k", f"k = {k}: n_k = {nk}")
    system = walsh_system(1 << m)
    return discrete_sidon_check(system, [1] + [v + 1 for v in n], l + 1, m + 1, p)


@dataclass(frozen=True)
class BicontrolReport:
    lhs: Fraction
    sup: Fraction
    rhs: Fraction
    holds_lower: bool
    holds_upper: bool

    def to_dict(self) -> dict:
        return {
            "lhs": str(self.lhs),
            "sup": str(self.sup),
            "rhs": str(self.rhs),
            "holds_lower": self.holds_lower,
            "holds_upper": self.holds_upper,
        }


def corollary_bicontrol_check(system: DiscreteSystem, n_seq: Sequence[int], a: Sequence) -> BicontrolReport:
    """``(1/M) sum|a_k| <= ||sum a_k phi_{n_k}||_inf <= M sum|a_k|``.

    ``n_seq`` and ``a`` list n_2..n_N and a_2..a_N, with
    ``m_{k-1} < n_k <= m_k``.
    """
    n = [int(v) for v in n_seq]
    if len(n) != len(a) or not n:
        raise HypothesisError("lengths", "n_seq and a must have the same positive length")
    m = system.m_seq
    if len(m) < len(n) + 1:
        raise HypothesisError("m_seq", f"m_seq too short for N = {len(n) + 1}")
    for k, nk in enumerate(n, start=2):
        if not m[k - 2] < nk <= m[k - 1]:
            raise HypothesisError("m_{k-1} < n_k <= m_k", f"k = {k}: n_k = {nk} not in ({m[k-2]}, {m[k-1]}]")
    if max(n) > len(system):
        raise HypothesisError("system length", f"needs phi_{max(n)}")
    V, den, L = system.matrix(max(n))
    C, cden = _common_fractions(list(a))
    f = _dot(C.reshape(1, -1), V[[v - 1 for v in n]])[0]
    sup = Fraction(_maxabs(f), cden * den)
    mass = Fraction(int(np.sum(np.abs(_big(C)))), cden)
    M = system.M_bound
    return BicontrolReport(mass / M, sup, M * mass, sup >= mass / M, sup <= M * mass)


def random_walsh_trial(rng: np.random.Generator, l: int, m: int, max_bits: int = 8):
    """Random admissible input for ``walsh_sidon_check``.

    n_k uniform on [2^{k-1}, 2^k); each p_k has 2^l coefficients
    ``j / 2^b`` in [-1, 1] with b uniform in [0, max_bits].
    """
    n = [int(rng.integers(1 << (k - 1), 1 << k)) for k in range(1, m + 1)]
    p = []
    for _ in range(l + 1, m + 1):
        b = int(rng.integers(0, max_bits + 1))
        nums = rng.integers(-(1 << b), (1 << b) + 1, size=1 << l)
        p.append([Fraction(int(v), 1 << b) for v in nums])
    return n, p
