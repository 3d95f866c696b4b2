import random

import pytest

from oracles import legendre_brute, pinned_b, primes_upto, residue_bit_brute
from towerforge.errors import DomainError
from towerforge.governing import (FrobeniusEvaluator, check_independent, dim_formula,
                                  frobenius_target, frobenius_vector, lattice_target, v_group,
                                  v_group_restricted)
from towerforge.quadfield import QQ, field_from_spec
from towerforge.tower import tower_data


def reps(G):
    return [str(x) for x in G.elements]


def test_v_group_over_q():
    assert reps(v_group(QQ)) == ["-1"]
    assert reps(v_group(QQ, [5])) == ["-1", "5"]
    assert reps(v_group(QQ, [5, 3])) == ["-1", "3", "5"]
    with pytest.raises(DomainError):
        v_group(QQ, [2])
    with pytest.raises(DomainError):
        v_group(QQ, [9])


def test_v_group_q10():
    K = field_from_spec(10)
    G = v_group(K)
    assert reps(G) == ["-1", "3+√10", "2"]
    assert G.tags()[:2] == ["torsion_unit", "fundamental_unit"]
    assert reps(v_group(K, [3])) == ["-1", "3+√10", "-1+√10"]
    G = v_group(K, [3, 31])
    assert reps(G)[-1] == "3+2√10"
    assert G.dim == dim_formula(K, [3, 31])["dim"] == 4


@pytest.mark.parametrize("m,S", [(10, []), (-5, []), (-5, [3]), (-21, []), (-21, [5, 7]),
                                 (65, []), (65, [3]), (1155, []), (-84, [5, 7])])
def test_v_group_dimension_and_independence(m, S):
    K = field_from_spec(m)
    G = v_group(K, S)
    assert G.dim == dim_formula(K, S)["dim"]
    assert check_independent(K, G.elements)
    # every element has even valuation outside S
    for x in G.elements:
        for P in K.odd_support(x):
            if P.ell not in S:
                assert K.valuation(x, P) % 2 == 0


def test_v_group_restricted_examples():
    # -1 is a square mod 5; 5 itself is not a local square there
    assert reps(v_group_restricted(QQ, [], [5])) == ["-1"]
    assert reps(v_group_restricted(QQ, [3], [5])) == ["-1"]
    G = v_group_restricted(QQ, [3], [7])
    # 3 mod 7 is a non-residue, -1 mod 7 too: their product -3 is a residue
    assert reps(G) == ["-3"]


def test_frobenius_vector_examples():
    G = v_group(QQ, [5])
    assert frobenius_vector(13, G).coords == (0, 1)
    assert frobenius_vector(29, G).coords == (0, 0)
    assert frobenius_vector(3, v_group(QQ)).coords == (1,)
    with pytest.raises(DomainError):
        frobenius_vector(5, G)


def test_frobenius_vector_matches_legendre_over_q():
    G = v_group(QQ, [3, 5, 7])
    for q in primes_upto(300)[4:]:
        want = tuple(0 if legendre_brute(int(x), q) == 1 else 1 for x in G.elements)
        assert frobenius_vector(q, G).coords == want


@pytest.mark.parametrize("m,S", [(10, [3]), (-5, [3]), (-21, [5]), (65, [])])
def test_frobenius_vector_matches_brute_residues(m, S):
    K = field_from_spec(m)
    G = v_group(K, S)
    data = [K.elt(x).xyd() for x in G.elements]
    ev = FrobeniusEvaluator(K, G.elements)
    for q in primes_upto(80):
        if q == 2 or K.disc % q == 0 or q in S:
            continue
        if any((A * A - K.m * B * B) % q == 0 or den % q == 0 for A, B, den in data):
            continue
        want = tuple(residue_bit_brute(K.m, K.disc, A, B, den, q) for A, B, den in data)
        assert frobenius_vector(q, G).coords == want
        assert ev.bits(q) == want


def test_pinned_prime_convention():
    K = field_from_spec(10)
    for q in (3, 13, 31, 37):
        P = K.pinned_prime(q)
        assert P.b == pinned_b(K.disc, q)


def test_fast_evaluator_agrees_with_audit_on_random_primes():
    rng = random.Random(7)
    K = field_from_spec(10)
    G = v_group(K, [3, 31])
    ev = FrobeniusEvaluator(K, G.elements)
    for q in rng.sample(primes_upto(5000)[20:], 60):
        bits = ev.bits(q)
        if bits is None:
            continue
        assert bits == frobenius_vector(q, G).coords


def test_frobenius_target():
    G = v_group(QQ, [3, 5])
    assert frobenius_target(G, [3, 5]) == (0, 1, 1)
    assert frobenius_target(G, [3, 5], a=[1, 0]) == (0, 1, 0)
    K = field_from_spec(10)
    assert frobenius_target(v_group(K, [3, 31]), [3, 31]) == (0, 0, 0, 1)


def test_lattice_target_modes():
    t = lattice_target(QQ, [5])
    assert t.block_a == (0, 1) and t.block_z == () and t.mode == "full"
    K = field_from_spec(10)
    t = lattice_target(K, [3, 31])
    assert t.mode == "local-only" and "local-conditions-only" in t.note
    t = lattice_target(K, [3, 31], tower_data(K, "C2"))
    assert t.mode == "full"
    assert t.block_z == (0, 1, 1, 0)
    assert t.local_conditions == (1, 1)
