"""Exact integer primitives: primality, Kronecker symbols, residue fields, prime iteration."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterator

from .errors import DomainError, ModelError

# Deterministic Miller-Rabin: the first 13 primes are a witness set for every
# n < 3317044064679887385961981 (Sorenson & Webster, 2015).
MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MR_LIMIT = 3317044064679887385961981

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for any integer a and nonzero integer n."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -sign
    # factor out powers of two of n
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 == 1 and a % 8 in (3, 5):
            sign = -sign
    # now n odd positive: Jacobi symbol
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                sign = -sign
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            sign = -sign
        a %= n
    return sign if n == 1 else 0


def legendre(a: int, p: int) -> int:
    return kronecker(a, p)


def is_prime(n: int) -> bool:
    """Deterministic primality test, valid for n < 3.3e24.

    Larger inputs are rejected rather than answered probabilistically.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n >= MR_LIMIT:
        raise DomainError(f"is_prime: {n} exceeds the deterministic range (< {MR_LIMIT})")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    n = max(n + 1, 2)
    while not is_prime(n):
        n += 1
    return n


def primes_between(lo: int, hi: int) -> list[int]:
    """All primes p with lo <= p < hi (segmented sieve)."""
    lo = max(lo, 2)
    if hi <= lo:
        return []
    root = math.isqrt(hi - 1)
    base = sieve(root + 1)
    seg = bytearray([1]) * (hi - lo)
    for p in base:
        start = max(p * p, (lo + p - 1) // p * p)
        seg[start - lo::p] = bytes(len(range(start - lo, hi - lo, p)))
    return [lo + i for i, flag in enumerate(seg) if flag]


def sieve(n: int) -> list[int]:
    """Primes below n."""
    if n < 3:
        return []
    flags = bytearray([1]) * n
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n - 1) + 1):
        if flags[p]:
            flags[p * p::p] = bytes(len(range(p * p, n, p)))
    return [i for i, f in enumerate(flags) if f]


def iter_primes(start: int = 2, stop: int | None = None, chunk: int = 1 << 16) -> Iterator[int]:
    lo = start
    while stop is None or lo < stop:
        hi = lo + chunk if stop is None else min(lo + chunk, stop)
        yield from primes_between(lo, hi)
        lo = hi


def odd_primes(stop: int) -> list[int]:
    return primes_between(3, stop)


def _pollard_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n  # noqa: E731
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def factorint(n: int) -> dict[int, int]:
    """Factor |n| by trial division and Pollard rho."""
    n = abs(n)
    if n == 0:
        raise DomainError("cannot factor 0")
    out: dict[int, int] = {}
    for p in sieve(1000):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    rng = random.Random(0x5eed)
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


def squarefree_part(n: int) -> tuple[int, int]:
    """Write n = core * f**2 with core squarefree (sign kept in core)."""
    if n == 0:
        raise DomainError("squarefree part of 0")
    core, f = (1 if n > 0 else -1), 1
    for p, e in factorint(n).items():
        if e % 2:
            core *= p
        f *= p ** (e // 2)
    return core, f


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def is_rational_square(x: Fraction) -> bool:
    x = Fraction(x)
    return x >= 0 and is_square(x.numerator) and is_square(x.denominator)


def rational_sqrt(x: Fraction) -> Fraction | None:
    x = Fraction(x)
    if not is_rational_square(x):
        return None
    return Fraction(math.isqrt(x.numerator), math.isqrt(x.denominator))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def frac_valuation(x: Fraction, p: int) -> int:
    x = Fraction(x)
    return valuation(x.numerator, p) - valuation(x.denominator, p)


def frac_mod(x: Fraction, m: int) -> int:
    """Reduce a rational with denominator prime to m modulo m."""
    x = Fraction(x)
    if math.gcd(x.denominator, m) != 1:
        raise DomainError(f"{x} is not integral at {m}")
    return x.numerator * pow(x.denominator, -1, m) % m


def sqrt_mod(a: int, p: int) -> int:
    """A square root of a modulo an odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if kronecker(a, p) != 1:
        raise DomainError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def hensel_sqrt(a: int, p: int, k: int) -> int:
    """Square root of a unit a modulo p**k lifted from a root mod p (p odd)."""
    r = sqrt_mod(a, p)
    mod = p
    for _ in range(1, k):
        mod *= p
        # r <- r - (r^2 - a) / (2r)
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return r


def two_adic_sqrt(a: int, k: int) -> int:
    """Square root of a = 1 mod 8 modulo 2**k."""
    if a % 8 != 1:
        raise DomainError(f"{a} is not a 2-adic square unit")
    r = 1
    for j in range(3, k):
        # keep r^2 = a mod 2^(j+1); adjust bit j-1 of r when needed
        if (r * r - a) % (1 << (j + 1)):
            r += 1 << (j - 1)
    return r % (1 << k)


def smallest_nonresidue(q: int) -> int:
    r = 2
    while kronecker(r, q) != -1:
        r += 1
    return r


class Fq2:
    """F_q[t]/(t^2 - r); elements are pairs (u, v) meaning u + v t."""

    def __init__(self, q: int, r: int | None = None):
        if q < 3 or q % 2 == 0:
            raise ModelError(f"F_q^2 model needs an odd prime q, got {q}")
        self.q = q
        self.r = smallest_nonresidue(q) if r is None else r % q
        if kronecker(self.r, q) != -1:
            raise ModelError(f"t^2 - {self.r} is reducible over F_{q}")

    def mul(self, x, y):
        q = self.q
        return ((x[0] * y[0] + self.r * x[1] * y[1]) % q, (x[0] * y[1] + x[1] * y[0]) % q)

    def pow(self, x, e):
        acc = (1, 0)
        base = (x[0] % self.q, x[1] % self.q)
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def norm(self, x):
        return (x[0] * x[0] - self.r * x[1] * x[1]) % self.q


def residue_power_test(x, q: int, deg: int = 1, nonresidue: int | None = None) -> int:
    """Quadratic character of x in F_q (deg 1) or F_{q^2} (deg 2), by Euler's criterion.

    For deg 2, x is a pair (u, v) standing for u + v t in F_q[t]/(t^2 - r).
    """
    if deg == 1:
        x %= q
        if x == 0:
            return 0
        e = pow(x, (q - 1) // 2, q)
        return 1 if e == 1 else -1
    if deg != 2:
        raise DomainError(f"residue degree must be 1 or 2, got {deg}")
    F = Fq2(q, nonresidue)
    u, v = x
    if u % q == 0 and v % q == 0:
        return 0
    e = F.pow((u, v), (q * q - 1) // 2)
    if e == (1, 0):
        return 1
    if e == (q - 1, 0):
        return -1
    raise ModelError(f"Euler test in F_{q}^2 gave {e}")
