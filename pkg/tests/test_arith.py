import pytest
from hypothesis import given, strategies as st

from towerforge import arith
from towerforge.errors import DomainError, ModelError

from oracles import legendre_brute


def test_kronecker_examples():
    assert arith.kronecker(5, 11) == 1
    assert {x * x % 11 for x in range(1, 11)} == {1, 3, 4, 5, 9}
    assert arith.kronecker(2, 15) == 1
    for a in range(-20, 20):
        assert arith.kronecker(a, 1) == 1


def test_kronecker_matches_legendre_small_primes():
    for p in arith.primes_between(3, 200):
        for a in range(-p, 2 * p):
            assert arith.kronecker(a, p) == legendre_brute(a, p)


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 4).map(lambda n: 2 * n + 1))
def test_kronecker_periodic_odd(a, n):
    assert arith.kronecker(a, n) == arith.kronecker(a % n, n)


@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 300))
def test_kronecker_multiplicative(a, b, n):
    assert arith.kronecker(a * b, n) == arith.kronecker(a, n) * arith.kronecker(b, n)


def test_kronecker_two_rule():
    # (a|2) = 1 for a = +-1 mod 8, -1 for a = +-3 mod 8
    for a in range(1, 80, 2):
        assert arith.kronecker(a, 2) == (1 if a % 8 in (1, 7) else -1)
    assert arith.kronecker(6, 2) == 0


def test_quadratic_reciprocity_exhaustive():
    ps = arith.primes_between(3, 10 ** 4)
    # symbols (p|q) for all pairs, vectorised per q
    for i, p in enumerate(ps):
        for q in ps[i + 1:]:
            sign = -1 if (p % 4 == 3 and q % 4 == 3) else 1
            assert arith.kronecker(p, q) * arith.kronecker(q, p) == sign


def test_is_prime():
    assert not arith.is_prime(1)
    assert arith.is_prime(13)
    assert not arith.is_prime(561)
    sieve = set(arith.sieve(20000))
    for n in range(20000):
        assert arith.is_prime(n) == (n in sieve)
    for n in (2 ** 61 - 1, 2 ** 31 - 1, 10 ** 18 + 3):
        assert arith.is_prime(n)
    assert not arith.is_prime((10 ** 9 + 7) * (10 ** 9 + 9))
    # strong pseudoprime to the first several prime bases
    assert not arith.is_prime(3825123056546413051)


def test_is_prime_rejects_out_of_range():
    n = arith.MR_LIMIT | 1
    while any(n % p == 0 for p in arith.sieve(50)):
        n += 2
    with pytest.raises(DomainError):
        arith.is_prime(n)


def test_primes_between_segments():
    assert arith.primes_between(10, 30) == [11, 13, 17, 19, 23, 29]
    assert list(arith.iter_primes(2, 50, chunk=7)) == arith.sieve(50)
    assert arith.primes_between(999_000, 1_000_000) == [p for p in arith.sieve(1_000_000) if p >= 999_000]


def test_residue_power_test_deg1():
    assert arith.residue_power_test(4, 7) == 1
    assert arith.residue_power_test(3, 5) == -1
    assert arith.residue_power_test(0, 5) == 0
    for q in arith.primes_between(3, 200):
        for x in range(q):
            assert arith.residue_power_test(x, q, 1) == arith.kronecker(x, q)


def test_residue_power_test_deg2_generator_of_f9():
    F = arith.Fq2(3)
    assert F.r == 2
    # find an element of order 8
    gens = [x for x in [(u, v) for u in range(3) for v in range(3)] if x != (0, 0)
            and all(F.pow(x, k) != (1, 0) for k in (1, 2, 4))]
    assert gens
    for g in gens:
        assert arith.residue_power_test(g, 3, 2) == -1
    # a square in F_9 (every element of F_3) is a square in F_9
    assert arith.residue_power_test((2, 0), 3, 2) == 1


def test_residue_power_test_model_error():
    with pytest.raises(ModelError):
        arith.residue_power_test((1, 1), 7, 2, nonresidue=2)  # 2 = 3^2 mod 7
    with pytest.raises(DomainError):
        arith.residue_power_test(1, 7, 3)


def test_sqrt_mod_and_lifts():
    for p in arith.primes_between(3, 300):
        for a in range(1, p):
            if arith.kronecker(a, p) == 1:
                r = arith.sqrt_mod(a, p)
                assert r * r % p == a
    r = arith.hensel_sqrt(10, 13, 6)
    assert (r * r - 10) % 13 ** 6 == 0
    for a in (1, 17, 41, 10 ** 6 + 1):
        r = arith.two_adic_sqrt(a, 40)
        assert (r * r - a) % 2 ** 40 == 0


def test_factor_and_squarefree():
    n = 2 ** 5 * 3 * 7 ** 2 * 1000003 * 998244353
    assert arith.factorint(n) == {2: 5, 3: 1, 7: 2, 1000003: 1, 998244353: 1}
    assert arith.squarefree_part(-72) == (-2, 6)
    assert arith.squarefree_part(40) == (10, 2)
