"""Hadamard matrices (Sylvester, Paley I/II, doubling) and towers of them.

A tower H_1, H_2, ... of Hadamard matrices with orders m_1 = 1 | m_2 | ...
is turned into a candidate step-function system: the rows of H_k, read as
functions on the m_k cells of [0, 1], supply phi_{m_{k-1}+1}..phi_{m_k}.
The candidate is then checked exactly and returned only if it passes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapExceededError
from .walsh import DiscreteSystem, StepFunction, SystemReport, verify_system_conditions

MAX_ORDER = 4096
SEED = np.array([[1, 1], [1, -1]], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    """A +-1 matrix of order n with ``H H^T = n I``; checked on construction."""

    entries: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        H = np.asarray(self.entries, dtype=np.int64)
        if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
            raise ValueError("entries must be a nonempty square matrix")
        if H.shape[0] > MAX_ORDER:
            raise CapExceededError(f"order {H.shape[0]} exceeds the cap of {MAX_ORDER}")
        if not np.all(np.abs(H) == 1):
            raise ValueError("entries must be +1 or -1")
        if not verify(H):
            raise ValueError(f"rows are not pairwise orthogonal ({self.provenance or 'input'})")
        H.setflags(write=False)
        object.__setattr__(self, "entries", H)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    def normalized(self) -> "HadamardMatrix":
        """Rows multiplied by the sign of their first entry."""
        H = self.entries * self.entries[:, :1]
        return HadamardMatrix(H, self.provenance + "+rownorm")

    def standard_form(self) -> "HadamardMatrix":
        """Columns, then rows, negated so the first row and column are all +1."""
        H = self.entries * self.entries[:1, :]
        H = H * H[:, :1]
        return HadamardMatrix(H, self.provenance + "+std")

    def to_text(self) -> str:
        rows = ("".join("+" if v > 0 else "-" for v in row) for row in self.entries)
        return f"{self.order}\n" + "\n".join(rows) + "\n"

    def __eq__(self, other):
        if not isinstance(other, HadamardMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    __hash__ = None


def verify(H) -> bool:
    """Exact check of ``H H^T = n I`` and ``H^T H = n I`` for a +-1 matrix.

    Entries are +-1 and n <= 4096, so every product sum is an integer far
    below 2^53 and the float64 products are exact.
    """
    H = np.asarray(H.entries if isinstance(H, HadamardMatrix) else H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        return False
    n = H.shape[0]
    if n > MAX_ORDER:
        raise CapExceededError(f"order {n} exceeds the cap of {MAX_ORDER}")
    if not np.all(np.abs(H) == 1):
        return False
    F = H.astype(float)
    target = n * np.eye(n)
    rows = bool(np.array_equal(F @ F.T, target))
    cols = bool(np.array_equal(F.T @ F, target))
    if rows != cols:
        # impossible for a square +-1 matrix; signals an arithmetic fault
        raise AssertionError("row and column orthogonality disagree")
    return rows


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a / p) for an odd prime p, by Euler's criterion."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def jacobsthal(p: int) -> np.ndarray:
    """``Q[i, j] = (j - i / p)``, the quadratic-character matrix of GF(p)."""
    if not is_prime(p) or p == 2:
        raise ValueError(f"p must be an odd prime, got {p}")
    chi = np.array([legendre(a, p) for a in range(p)], dtype=np.int64)
    i = np.arange(p)
    return chi[(i[None, :] - i[:, None]) % p]


def sylvester(k: int) -> HadamardMatrix:
    """Order 2^k, k doublings of [[1]]; row n is w_n sampled on 2^k cells."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if (1 << k) > MAX_ORDER:
        raise CapExceededError(f"order 2^{k} exceeds the cap of {MAX_ORDER}")
    H = np.ones((1, 1), dtype=np.int64)
    for _ in range(k):
        H = _double(H)
    return HadamardMatrix(H, f"sylvester:{k}")


def paley1(p: int) -> HadamardMatrix:
    """Order p + 1 for a prime p = 3 (mod 4): ``I + [[0, 1^T], [-1, Q]]``."""
    if not is_prime(p) or p % 4 != 3:
        raise ValueError(f"paley1 needs a prime p = 3 (mod 4), got {p}")
    if p + 1 > MAX_ORDER:
        raise CapExceededError(f"order {p + 1} exceeds the cap of {MAX_ORDER}")
    Q = jacobsthal(p)
    S = np.zeros((p + 1, p + 1), dtype=np.int64)
    S[0, 1:] = 1
    S[1:, 0] = -1
    S[1:, 1:] = Q
    return HadamardMatrix(S + np.eye(p + 1, dtype=np.int64), f"paley1:{p}")


def paley2(p: int) -> HadamardMatrix:
    """Order 2(p + 1) for a prime p = 1 (mod 4).

    With the symmetric conference matrix ``C = [[0, 1^T], [1, Q]]`` the
    result is ``[[C + I, C - I], [C - I, -C - I]]``.
    """
    if not is_prime(p) or p % 4 != 1:
        raise ValueError(f"paley2 needs a prime p = 1 (mod 4), got {p}")
    if 2 * (p + 1) > MAX_ORDER:
        raise CapExceededError(f"order {2 * (p + 1)} exceeds the cap of {MAX_ORDER}")
    Q = jacobsthal(p)
    C = np.zeros((p + 1, p + 1), dtype=np.int64)
    C[0, 1:] = 1
    C[1:, 0] = 1
    C[1:, 1:] = Q
    I = np.eye(p + 1, dtype=np.int64)
    H = np.block([[C + I, C - I], [C - I, -C - I]])
    return HadamardMatrix(H, f"paley2:{p}")


def _double(H: np.ndarray) -> np.ndarray:
    K = np.kron(H, SEED)
    return np.vstack([K[0::2], K[1::2]])


def double(H: HadamardMatrix) -> HadamardMatrix:
    """``H (x) [[1, 1], [1, -1]]`` with rows reordered as ``[[H (x) (1, 1)], [H (x) (1, -1)]]``.

    The first n rows are the rows of H stretched to 2n cells, so a tower
    built by doubling keeps every earlier row as a lifted row, and
    ``double(sylvester(k)) == sylvester(k + 1)``.
    """
    if 2 * H.order > MAX_ORDER:
        raise CapExceededError(f"order {2 * H.order} exceeds the cap of {MAX_ORDER}")
    return HadamardMatrix(_double(H.entries), f"double({H.provenance})")


def construct(spec: str | dict) -> HadamardMatrix:
    """From ``"sylvester:k"``, ``"paley1:p"``, ``"paley2:p"`` or a dict
    ``{"kind": ..., "param": ..., "double": times}``."""
    if isinstance(spec, str):
        kind, _, param = spec.partition(":")
        times = 0
    else:
        kind, param, times = spec["kind"], spec.get("param"), int(spec.get("double", 0))
    try:
        v = int(param)
    except (TypeError, ValueError):
        raise ValueError(f"bad construction parameter in {spec!r}") from None
    makers = {"sylvester": sylvester, "paley1": paley1, "paley2": paley2}
    if kind not in makers:
        raise ValueError(f"unknown construction {kind!r}")
    H = makers[kind](v)
    for _ in range(times):
        H = double(H)
    return H


def parse_text(text: str) -> np.ndarray:
    """Matrix text format: the order on the first line, then one row of
    '+'/'-' characters per line. Returns the raw array (not verified)."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    n = int(lines[0])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"expected {n} rows of {n} characters")
    if any(c not in "+-" for r in rows for c in r):
        raise ValueError("rows may contain only '+' and '-'")
    return np.array([[1 if c == "+" else -1 for c in r] for r in rows], dtype=np.int64)


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return parse_text(fh.read())


def write_matrix(H: HadamardMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(H.to_text())


def paley_tower(p: int, levels: int) -> list[HadamardMatrix]:
    """Orders 1, alpha, 2 alpha, 4 alpha, ... with alpha = p + 1 (Paley I)
    or 2(p + 1) (Paley II), by repeated doubling; ``levels`` matrices.

    The Paley matrix is put in standard form first so that it contains
    the all-ones row.
    """
    base = (paley1(p) if p % 4 == 3 else paley2(p)).standard_form()
    tower = [HadamardMatrix(np.ones((1, 1), dtype=np.int64), "trivial:1"), base]
    while len(tower) < levels:
        tower.append(double(tower[-1]))
    return tower[:levels]


def sylvester_tower(levels: int) -> list[HadamardMatrix]:
    """Orders 1, 2, 4, ..., 2^{levels-1}."""
    return [sylvester(k) for k in range(levels)]


@dataclass(frozen=True)
class TowerRejection:
    """Why a tower did not yield a valid system."""

    condition: str
    indices: tuple | None
    detail: str
    report: SystemReport | None = None

    def to_dict(self) -> dict:
        return {"rejected": True, "condition": self.condition, "indices": self.indices, "detail": self.detail}


def _contains_rows(big: np.ndarray, rows: np.ndarray) -> np.ndarray | None:
    """Indices in ``big`` of each row of ``rows`` (None if one is missing)."""
    lookup = {r.tobytes(): i for i, r in enumerate(big)}
    idx = [lookup.get(r.tobytes()) for r in rows]
    return None if any(i is None for i in idx) else np.array(idx)


def system_from_tower(tower: Sequence[HadamardMatrix]) -> DiscreteSystem | TowerRejection:
    """Checked candidate system from a tower with orders ``1 = m_1 < m_2 < ...``.

    Rows are sign-normalized by their first entry. phi_1..phi_{m_1} come
    from H_1; for k >= 2 the rows of H_k that are not lifts of phi_1..
    phi_{m_{k-1}} become phi_{m_{k-1}+1}..phi_{m_k}, in row order. A tower
    whose H_k does not contain the lifted earlier functions is rejected, as
    is any candidate that fails the exact conditions with M = 1.
    """
    if not tower:
        raise ValueError("empty tower")
    orders = [H.order for H in tower]
    if orders[0] != 1:
        raise ValueError("the first matrix must have order 1")
    for a, b in zip(orders, orders[1:]):
        if b <= a or b % a:
            raise ValueError(f"orders must increase and divide each other, got {a} then {b}")
    L = orders[-1]
    first = tower[0].entries
    if first[0, 0] != 1:
        return TowerRejection("phi1", (1,), "first matrix is not [[+1]]: phi_1 is not identically 1")
    rows = np.ones((1, L), dtype=np.int64)
    for k in range(1, len(tower)):
        H = tower[k].normalized().entries
        m = H.shape[0]
        lifted = rows[:, :: L // m]  # previous functions sampled on m cells
        if not np.array_equal(np.repeat(lifted, L // m, axis=1), rows):
            return TowerRejection(
                "condition 1", (k + 1,), f"earlier functions are not constant on the {m}-cell grid"
            )
        idx = _contains_rows(H, lifted)
        if idx is None and _contains_rows(H, lifted[:1]) is None:
            return TowerRejection("phi1", (k + 1,), f"matrix {k + 1} has no all-ones row: phi_1 is not identically 1")
        if idx is None:
            return TowerRejection(
                "nesting", (k + 1,), f"matrix {k + 1} does not contain the lifts of phi_1..phi_{rows.shape[0]}"
            )
        fresh = np.setdiff1d(np.arange(m), idx)
        rows = np.vstack([rows, np.repeat(H[fresh], L // m, axis=1)])
    funcs = tuple(StepFunction(r) for r in rows)
    system = DiscreteSystem(funcs, tuple(orders), name="tower:" + ",".join(H.provenance for H in tower))
    report = verify_system_conditions(system)
    if not report.passed:
        cond = report.failures()[0]
        return TowerRejection(cond, getattr(report, cond).counterexample, getattr(report, cond).detail, report)
    if report.M != 1:
        return TowerRejection("condition 3", None, f"M = {report.M}, expected 1", report)
    return system
