import numpy as np
import pytest

import oracles
from sidonkit import CapExceededError, DiscreteSystem, HadamardMatrix, construct, double, paley1, paley2, sylvester, system_from_tower, verify
from sidonkit.hadamard import (
    TowerRejection,
    is_prime,
    jacobsthal,
    legendre,
    paley_tower,
    parse_text,
    read_matrix,
    sylvester_tower,
    write_matrix,
)
from sidonkit.walsh import verify_system_conditions, walsh_system

PRIMES = [p for p in range(3, 200) if all(p % d for d in range(2, int(p**0.5) + 1))]


def test_constructions_examples():
    assert sylvester(1).entries.tolist() == [[1, 1], [1, -1]]
    assert sylvester(0).entries.tolist() == [[1]]
    H = paley1(3)
    assert H.order == 4 and oracles.int_matmul_is_nI(H.entries.tolist())
    D = double(sylvester(1))
    assert D.order == 4 and oracles.int_matmul_is_nI(D.entries.tolist())
    assert double(sylvester(4)) == sylvester(5)


def test_construct_specs():
    assert construct("sylvester:3") == sylvester(3)
    assert construct({"kind": "paley2", "param": 5, "double": 2}).order == 48
    with pytest.raises(ValueError):
        construct("paley1:5")
    with pytest.raises(ValueError):
        construct("paley2:7")
    with pytest.raises(ValueError):
        construct("hilbert:3")
    with pytest.raises(ValueError):
        construct("sylvester:x")
    with pytest.raises(CapExceededError):
        construct("sylvester:13")
    with pytest.raises(CapExceededError):
        construct({"kind": "sylvester", "param": 12, "double": 1})


def test_verify_examples():
    assert verify(sylvester(10))
    H = paley1(199).entries.copy()
    assert verify(H)
    H[5, 7] *= -1
    assert not verify(H)
    assert not verify(np.array([[1, 2], [1, -1]]))
    assert not verify(np.ones((2, 3)))


def test_matrix_type_rejects_non_hadamard():
    with pytest.raises(ValueError):
        HadamardMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        HadamardMatrix(np.zeros((0, 0)))


def test_small_orders_against_integer_oracle():
    for H in (paley1(7), paley1(11), paley2(5), paley2(13), sylvester(4), double(paley1(3))):
        assert oracles.int_matmul_is_nI(H.entries.tolist())


def test_primality_and_legendre():
    assert [p for p in range(200) if is_prime(p)] == [2] + PRIMES
    for p in PRIMES[:15]:
        for a in range(-3, 2 * p):
            assert legendre(a, p) == oracles.legendre_oracle(a, p)


def test_jacobsthal_identities():
    for p in PRIMES:
        Q = jacobsthal(p)
        J = np.ones((p, p), dtype=np.int64)
        assert np.array_equal(Q @ Q.T, p * np.eye(p, dtype=np.int64) - J)
        if p % 4 == 3:
            assert not (Q + Q.T).any()
        else:
            assert np.array_equal(Q, Q.T)


def test_all_paley_orders_exact():
    for p in PRIMES:
        H = paley1(p) if p % 4 == 3 else paley2(p)
        assert H.order == (p + 1 if p % 4 == 3 else 2 * (p + 1))
        F = H.entries
        assert np.array_equal(F @ F.T, H.order * np.eye(H.order, dtype=np.int64))


def test_normal_forms():
    H = paley2(5).standard_form()
    assert (H.entries[0] == 1).all() and (H.entries[:, 0] == 1).all()
    N = paley1(7).normalized()
    assert (N.entries[:, 0] == 1).all()


def test_text_round_trip(tmp_path):
    H = paley1(7)
    path = tmp_path / "h.txt"
    write_matrix(H, path)
    assert path.read_text().splitlines()[0] == "8"
    assert np.array_equal(read_matrix(path), H.entries)
    with pytest.raises(ValueError):
        parse_text("2\n++\n+")
    with pytest.raises(ValueError):
        parse_text("2\n++\n+x")


def test_sylvester_tower_is_walsh_prefix():
    system = system_from_tower(sylvester_tower(7))
    assert isinstance(system, DiscreteSystem)
    walsh = walsh_system(64)
    assert system.m_seq == walsh.m_seq
    assert all(a == b for a, b in zip(system.functions, walsh.functions))
    assert verify_system_conditions(system).M == 1


def test_paley3_tower_verdict():
    tower = paley_tower(3, 3)
    assert [H.order for H in tower] == [1, 4, 8]
    system = system_from_tower(tower)
    assert isinstance(system, DiscreteSystem)
    rep = verify_system_conditions(system)
    assert rep.passed and rep.M == 1


def test_returned_systems_always_pass():
    for p in (5, 7, 11, 13, 19):
        out = system_from_tower(paley_tower(p, 3))
        if isinstance(out, DiscreteSystem):
            rep = verify_system_conditions(out)
            assert rep.passed and rep.M == 1


def test_tower_rejections():
    H = sylvester(2).entries.copy()
    H[:, 1] *= -1  # no all-ones row even after row normalisation
    out = system_from_tower([sylvester(0), HadamardMatrix(H)])
    assert isinstance(out, TowerRejection) and out.condition == "phi1"
    out = system_from_tower([HadamardMatrix(np.array([[-1]])), sylvester(1)])
    assert isinstance(out, TowerRejection) and out.condition == "phi1"
    # swapping two middle columns keeps the all-ones row but loses the lift of w_1
    S = sylvester(3).entries[:, [0, 1, 2, 4, 3, 5, 6, 7]]
    out = system_from_tower([sylvester(0), sylvester(1), HadamardMatrix(S)])
    assert isinstance(out, TowerRejection) and out.condition == "nesting"
    assert out.to_dict()["rejected"]
    with pytest.raises(ValueError):
        system_from_tower([sylvester(0), sylvester(2), paley1(3).standard_form(), sylvester(3)])
