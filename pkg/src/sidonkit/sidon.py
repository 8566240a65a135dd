"""Lacunary sequences and Sidon-type inequality audits for trigonometric sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import HypothesisError
from .trigpoly import NormEnclosure, TrigPoly, multiply, norm_l1, norm_sup


def _as_fraction(lam) -> Fraction:
    return lam if isinstance(lam, Fraction) else Fraction(lam)


def validate_lacunary(terms: Sequence[int], lam) -> bool:
    """True iff terms are strictly increasing positive integers with
    ``n_{k+1} >= lam * n_k`` for every consecutive pair.

    ``lam`` is compared exactly (floats are converted to their exact rational
    value, so ``2.1`` means the double nearest 2.1).
    """
    terms = [int(v) for v in terms]
    if not terms:
        raise ValueError("terms must be nonempty")
    if terms[0] <= 0:
        return False
    q = _as_fraction(lam)
    for a, b in zip(terms, terms[1:]):
        if b <= a or b * q.denominator < q.numerator * a:
            return False
    return True


@dataclass(frozen=True)
class LacunarySequence:
    terms: tuple[int, ...]
    lambda_floor: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(int(v) for v in self.terms))
        if not validate_lacunary(self.terms, 1):
            raise ValueError("terms must be strictly increasing positive integers")
        if self.lambda_floor > 1 and not validate_lacunary(self.terms, self.lambda_floor):
            raise ValueError(f"terms are not in Lambda({self.lambda_floor})")

    @classmethod
    def geometric(cls, lam: float, n0: int, count: int) -> "LacunarySequence":
        """``n_{k+1} = ceil(lam * n_k)`` (and at least ``n_k + 1``) from ``n0``."""
        q = _as_fraction(lam)
        terms = [int(n0)]
        for _ in range(count - 1):
            prev = terms[-1]
            terms.append(max(prev + 1, math.ceil(q * prev)))
        return cls(tuple(terms), float(lam))

    def __len__(self):
        return len(self.terms)

    def __getitem__(self, k):
        return self.terms[k]


def split_count(lam) -> int:
    """``d = ceil(ln 7 / ln lam)``, computed as the least d with ``lam^d >= 7``."""
    q = _as_fraction(lam)
    if q <= 1:
        raise ValueError("lambda must exceed 1")
    d, p = 1, q
    while p < 7:
        p *= q
        d += 1
    return d


def split_lacunary(terms: Sequence[int], lam) -> list[tuple[int, ...]]:
    """Interleaved split ``U^(j) = (n_j, n_{j+d}, n_{j+2d}, ...)``, ``j = 1..d``.

    Each piece has consecutive ratios ``>= lam^d >= 7``.
    """
    terms = tuple(int(v) for v in terms)
    if not validate_lacunary(terms, lam):
        raise ValueError(f"sequence is not in Lambda({lam})")
    d = split_count(lam)
    return [terms[j::d] for j in range(d)]


def gamma_bound(lam: float, eps: float) -> float:
    """``min((lam - 1) / (2 (1 + eps)), 1 / (1 + eps))``."""
    if lam <= 1:
        raise ValueError("lambda must exceed 1")
    if not 0 <= eps < math.inf:
        raise ValueError("eps must be a nonnegative real")
    return min((lam - 1) / (2 * (1 + eps)), 1 / (1 + eps))


def admissible_degrees(seq: Sequence[int], l: int, m: int, eps: float, B: float = 1.0) -> np.ndarray:
    """Degree bounds ``r_l, ..., r_m`` for the envelopes (1-based ``l``, ``m``).

    ``r_l = min(gap_{l+1} / (2(1+eps)), n_l / (1+eps))``, interior ``r_k`` take
    the smaller adjacent half-gap and ``B n_l``, and ``r_m`` uses the left
    gap and ``B n_l``; ``gap_k = n_k - n_{k-1}``.
    """
    n = [int(v) for v in seq]
    if l < 1 or m < l + 2:
        raise ValueError("need l >= 1 and m >= l + 2")
    if len(n) < m:
        raise ValueError(f"sequence has {len(n)} terms, needs at least m = {m}")
    if not 0 < eps < math.inf or not 1 <= B < math.inf:
        raise ValueError("need eps > 0 and B >= 1")
    c = 2 * (1 + eps)
    nl = n[l - 1]
    r = [min((n[l] - nl) / c, nl / (1 + eps))]
    for k in range(l + 1, m):
        r.append(min((n[k - 1] - n[k - 2]) / c, (n[k] - n[k - 1]) / c, B * nl))
    r.append(min((n[m - 1] - n[m - 2]) / c, B * nl))
    return np.array(r)


@dataclass(frozen=True)
class ModulatedPolynomialFamily:
    """``f(x) = sum_{k=l}^m (p_k(x) cos n_k x + q_k(x) sin n_k x)``.

    ``p[i]`` and ``q[i]`` belong to index ``k = l + i``. When ``eps`` (and
    optionally ``B``) is given, envelope degrees are checked against
    ``floor(r_k)``.
    """

    seq: tuple[int, ...]  # a LacunarySequence is accepted and unpacked
    l: int
    m: int
    p: tuple[TrigPoly, ...]
    q: tuple[TrigPoly, ...]
    eps: float | None = None
    B: float = 1.0
    degrees: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        terms = self.seq.terms if isinstance(self.seq, LacunarySequence) else self.seq
        object.__setattr__(self, "seq", tuple(int(v) for v in terms))
        count = self.m - self.l + 1
        if self.l < 1 or count < 1:
            raise ValueError("need 1 <= l <= m")
        if len(self.seq) < self.m:
            raise ValueError("sequence shorter than m")
        if len(self.p) != count or len(self.q) != count:
            raise ValueError(f"need {count} envelopes in p and in q")
        if self.eps is not None:
            r = admissible_degrees(self.seq, self.l, self.m, self.eps, self.B)
            object.__setattr__(self, "degrees", r)
            for i, (pk, qk) in enumerate(zip(self.p, self.q)):
                cap = math.floor(r[i])
                if pk.degree > cap or qk.degree > cap:
                    raise HypothesisError(
                        "envelope degree", f"k = {self.l + i}: deg {max(pk.degree, qk.degree)} > [r_k] = {cap}"
                    )

    @classmethod
    def constants(cls, seq, alpha, beta) -> "ModulatedPolynomialFamily":
        """Constant envelopes over all of ``seq`` (``l = 1``, ``m = len(seq)``)."""
        seq = tuple(seq)
        return cls(seq, 1, len(seq), tuple(TrigPoly(a) for a in alpha), tuple(TrigPoly(b) for b in beta))

    def frequencies(self) -> tuple[int, ...]:
        return self.seq[self.l - 1 : self.m]


def assemble_modulated(family: ModulatedPolynomialFamily) -> TrigPoly:
    """Expand ``f`` into a single trigonometric polynomial."""
    out = TrigPoly.zero()
    for nk, pk, qk in zip(family.frequencies(), family.p, family.q):
        if not pk.is_zero():
            out = out + multiply(pk, TrigPoly.cosine(nk))
        if not qk.is_zero():
            out = out + multiply(qk, TrigPoly.sine(nk))
    return out


@dataclass(frozen=True)
class SidonRatioReport:
    """``||f||_inf`` against the envelope mass.

    ``denom`` is the sum of normalised L1 norms ``(1/2pi) int |p_k|`` (the
    mean absolute value), so a constant envelope ``alpha`` counts ``|alpha|``.
    ``trivial_upper`` is ``sum(||p_k||_inf + ||q_k||_inf) / denom``, an upper
    certificate for the ratio from the triangle inequality.
    """

    sup: NormEnclosure
    denom: float
    ratio_lower: float
    ratio_upper: float
    trivial_upper: float

    def to_dict(self) -> dict:
        return {
            "sup": self.sup.to_dict(),
            "denom": self.denom,
            "ratio_lower": self.ratio_lower,
            "ratio_upper": self.ratio_upper,
            "trivial_upper": self.trivial_upper,
        }


def sidon_ratio(family: ModulatedPolynomialFamily, tol: float = 1e-8) -> SidonRatioReport:
    f = assemble_modulated(family)
    sup = norm_sup(f, tol)
    mass = 0.0
    sup_mass = 0.0
    for env in family.p + family.q:
        if env.is_zero():
            continue
        mass += norm_l1(env, tol).mid / (2 * math.pi)
        sup_mass += norm_sup(env, tol).upper
    if mass <= 0:
        raise ValueError("all envelopes are zero")
    return SidonRatioReport(sup, mass, sup.lower / mass, sup.upper / mass, sup_mass / mass)


def riesz_product(seq: Sequence[int] | LacunarySequence, m: int | None = None) -> TrigPoly:
    """``prod_{k=1}^m (1 + cos n_k x)`` expanded exactly.

    Requires ratio ``>= 3`` among the first ``m`` terms, which makes every
    frequency ``sum eps_k n_k`` representable in one way only; then all
    coefficients are powers of 1/2 and the constant term is exactly 1.
    """
    terms = tuple(seq.terms if isinstance(seq, LacunarySequence) else seq)
    m = len(terms) if m is None else m
    terms = terms[:m]
    if m < 1 or len(terms) < m:
        raise ValueError("need 1 <= m <= len(seq)")
    if not validate_lacunary(terms, 3):
        raise ValueError("Riesz product needs consecutive ratios >= 3")
    out = TrigPoly(1.0)
    for nk in terms:
        out = multiply(out, TrigPoly(1.0) + TrigPoly.cosine(nk))
    return out.canonical()
