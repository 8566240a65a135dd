import math

import numpy as np
import pytest

import oracles
from sidonkit import CapExceededError, TrigPoly, dyadic_blocks, log_poly, norm_l2_exact, oskolkov_poly, qc_exact, qc_monte_carlo
from sidonkit.qc import (
    block_values_at_zero,
    parallel_map,
    qc_block_lower_proxy,
    qc_pattern_values,
    step_comparison,
    variation_hypothesis_check,
)


def flip_block(t, j):
    out = TrigPoly.zero()
    for i, b in enumerate(dyadic_blocks(t)):
        out = out + (-b if i == j else b)
    return out


def test_qc_exact_examples():
    assert qc_exact(TrigPoly.cosine(1)).value == pytest.approx(1.0, abs=1e-6)
    est = qc_exact(TrigPoly(5))
    assert est.value == 5 and est.method == "exact" and est.samples is None
    # four sign patterns, each sup taken on a 2^16 grid and polished
    assert qc_exact(oskolkov_poly(2), 1e-6).value == pytest.approx(oracles.qc_oracle(oracles.oskolkov_coeffs(2)), abs=1e-6)
    assert qc_exact(oskolkov_poly(2), 1e-6).value == pytest.approx(1.625, abs=1e-6)


def test_qc_exact_against_oracle():
    rng = np.random.default_rng(5)
    a = rng.uniform(-1, 1, 15)
    assert qc_exact(TrigPoly(0, a), 1e-7).value == pytest.approx(oracles.qc_oracle(a), abs=1e-6)
    assert qc_exact(TrigPoly(0.4, a), 1e-7).value == pytest.approx(oracles.qc_oracle(a, 0.4), abs=1e-6)


def test_qc_exact_cap_and_validation():
    with pytest.raises(CapExceededError, match="qc_monte_carlo"):
        qc_exact(oskolkov_poly(15))
    with pytest.raises(ValueError):
        qc_exact(TrigPoly.cosine(1), 0)


def test_zero_blocks_are_skipped():
    t = TrigPoly(0, [1, 0, 0, 0, 0, 0, 0, 0.5])  # blocks 1 and 4 only
    est = qc_exact(t)
    assert est.patterns == 4
    assert qc_pattern_values(t).size == 4


def test_monte_carlo_examples():
    est = qc_monte_carlo(TrigPoly.cosine(1), 16, seed=3)
    assert est.value == pytest.approx(1.0, abs=1e-6) and est.std_error == pytest.approx(0.0, abs=1e-12)
    assert est.rng == "numpy.Philox" and est.seed == 3
    assert qc_monte_carlo(TrigPoly.zero(), 4, seed=0).value == 0
    with pytest.raises(ValueError):
        qc_monte_carlo(TrigPoly.cosine(1), 1, seed=0)


def test_monte_carlo_close_to_exact_oskolkov6():
    t = oskolkov_poly(6)
    exact = qc_exact(t).value
    mc = qc_monte_carlo(t, 4096, seed=11)
    assert abs(mc.value - exact) <= 3 * mc.std_error


def test_monte_carlo_is_deterministic():
    t = log_poly(31)
    a = qc_monte_carlo(t, 50, seed=42)
    b = qc_monte_carlo(t, 50, seed=42)
    assert a == b
    assert qc_monte_carlo(t, 50, seed=43).value != a.value


def test_monte_carlo_consistency_over_seeds():
    rng = np.random.default_rng(9)
    t = TrigPoly(0.2, rng.uniform(-1, 1, 7))
    exact = qc_exact(t).value
    hits = 0
    for seed in range(100):
        mc = qc_monte_carlo(t, 32, seed)
        hits += abs(mc.value - exact) <= 4 * mc.std_error
    assert hits >= 99


def test_scaling():
    t = log_poly(15)
    tol = 1e-6
    base = qc_exact(t, tol).value
    for alpha in (-2.0, 0.5, 3.0):
        assert abs(qc_exact(t.scale(alpha), tol).value - abs(alpha) * base) <= 2 * tol * max(1, abs(alpha))


def test_sign_flip_symmetry():
    t = oskolkov_poly(5)
    v = qc_exact(t).value
    for j in range(1, 6):
        assert qc_exact(flip_block(t, j)).value == v


def test_lower_bound_by_l2():
    rng = np.random.default_rng(2)
    tol = 1e-6
    for _ in range(5):
        t = TrigPoly(rng.uniform(-1, 1), rng.uniform(-1, 1, 31), rng.uniform(-1, 1, 31))
        assert qc_exact(t, tol).value >= norm_l2_exact(t) / math.sqrt(2 * math.pi) - 2 * tol


def test_oskolkov_poly_examples():
    assert oskolkov_poly(1).coefficients_equal(TrigPoly.cosine(1))
    assert oskolkov_poly(2).cos.tolist() == [1.0, 0.5, 0.5]
    assert oskolkov_poly(7).N == 127
    assert oskolkov_poly(4).cos.tolist() == oracles.oskolkov_coeffs(4)
    with pytest.raises(CapExceededError):
        oskolkov_poly(21)


def test_log_poly_examples():
    assert log_poly(2).cos.tolist() == [1.0, 0.5]
    blk = dyadic_blocks(log_poly(3))[2]
    assert blk.canonical().cos.tolist() == [0.0, 0.5, 1 / 3]
    for k in range(2, 11):
        assert all(v > 0.5 for v in block_values_at_zero(log_poly((1 << k) - 1)))
    with pytest.raises(CapExceededError):
        log_poly(1)


def test_block_values_match_rational_oracle():
    t = log_poly(255)
    assert block_values_at_zero(t) == pytest.approx(oracles.block_sums_at_zero(oracles.logcos_coeffs(255)), rel=1e-15)


def test_variation_examples():
    for n in range(1, 9):
        a = [1 / (2 * k) for k in range(1, 1 << n)]
        assert all(r.holds for r in variation_hypothesis_check(a))
    (row,) = variation_hypothesis_check([0.5])
    assert row.lhs == 0.5 and row.holds
    rows = variation_hypothesis_check([1.0] * 15)
    assert [r.holds for r in rows] == [False] * 4
    with pytest.raises(ValueError):
        variation_hypothesis_check([1, 2])


def test_variation_hypothesis_implies_small_blocks():
    # with a_k = 1/(2k) the Oskolkov-type bound applies; sanity of lhs values
    rows = variation_hypothesis_check([1 / (2 * k) for k in range(1, 8)])
    assert [r.j for r in rows] == [1, 2, 3]
    assert rows[0].lhs == 0.5
    assert rows[1].lhs == pytest.approx(1 / 6 + (1 / 4 - 1 / 6))


def test_block_lower_proxy_examples():
    assert qc_block_lower_proxy(TrigPoly.cosine(1)) == 1.0
    for k in range(2, 11):
        assert qc_block_lower_proxy(log_poly((1 << k) - 1)) > math.sqrt(k) / 2
    assert qc_block_lower_proxy(TrigPoly(0, np.zeros(9), np.ones(9))) == 0.0


def test_step_comparison_is_finite():
    d = step_comparison(5, [1, -1, 1, 1, -1], points=1 << 12)
    assert math.isfinite(d) and d >= 0
    with pytest.raises(ValueError):
        step_comparison(3, [1, 1])


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("SIDONKIT_THREADS", "4")
    assert parallel_map(lambda x: x * x, range(50)) == [x * x for x in range(50)]
    t = oskolkov_poly(6)
    threaded = qc_exact(t).value
    monkeypatch.setenv("SIDONKIT_THREADS", "1")
    assert qc_exact(t).value == threaded
