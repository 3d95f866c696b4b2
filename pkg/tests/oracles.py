"""Brute-force reference computations, independent of the package internals."""

import math
from fractions import Fraction
from itertools import product


def legendre_brute(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if any(x * x % p == a for x in range(1, p)) else -1


def chi_table(D):
    """chi_D(n) for 0 <= n < |D|, multiplicatively from prime values (Euler criterion)."""
    N = abs(D)
    spf = list(range(N))
    for p in range(2, int(N ** 0.5) + 1):
        if spf[p] == p:
            for k in range(p * p, N, p):
                if spf[k] == k:
                    spf[k] = p
    chi = [0] * N
    if N > 1:
        chi[1] = 1
    for n in range(2, N):
        p = spf[n]
        if p == 2:
            v = 0 if D % 2 == 0 else (1 if D % 8 in (1, 7) else -1)
        else:
            e = pow(D % p, (p - 1) // 2, p)
            v = 0 if D % p == 0 else (1 if e == 1 else -1)
        chi[n] = v * chi[n // p]
    return chi


def analytic_class_number_imag(D):
    w = {-3: 6, -4: 4}.get(D, 2)
    chi = chi_table(D)
    s = sum(chi[n] * n for n in range(1, -D))
    return Fraction(-w * s, 2 * -D)


def pell_unit(D, ymax=None):
    """Fundamental unit (x + y sqrt D)/2 with x^2 - D y^2 = +-4, smallest y > 0."""
    y = 1
    while ymax is None or y <= ymax:
        for sgn in (-4, 4):
            t = D * y * y + sgn
            if t > 0:
                x = math.isqrt(t)
                if x * x == t:
                    return x, y, (x * x - D * y * y) // 4
        y += 1
    return None


def analytic_class_number_real(D, log_eps):
    """h(D) from the Dirichlet formula, given log of the fundamental unit."""
    chi = chi_table(D)
    s = -sum(chi[n] * math.log(math.sin(math.pi * n / D)) for n in range(1, D))
    return s / (2 * log_eps)


def reduced_forms_brute(D):
    """All reduced primitive definite forms by scanning a box."""
    out = []
    bound = math.isqrt(-D) + 2
    for a in range(1, bound):
        for b in range(-a, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            out.append((a, b, c))
    return out


# --- ideals as Z-lattices, coordinates (u, v) meaning u + v*w

def omega_mult(D):
    """w^2 = t w + n for the ring of integers of discriminant D."""
    if D % 4 == 1:
        return 1, (D - 1) // 4
    return 0, D // 4


def hnf2(vectors):
    """Hermite normal form [[a, b], [0, d]] (rows) of a rank-2 lattice in Z^2."""
    rows = [list(v) for v in vectors if any(v)]
    # column 1 gcd
    while sum(1 for r in rows if r[1]) > 1:
        rows.sort(key=lambda r: (r[1] == 0, abs(r[1])))
        p = rows[0]
        rows = [p] + [[x - (r[1] // p[1]) * y for x, y in zip(r, p)] for r in rows[1:]]
        rows = [r for r in rows if any(r)]
    piv = next(r for r in rows if r[1])
    if piv[1] < 0:
        piv = [-piv[0], -piv[1]]
    rest = [r for r in rows if r is not piv and not r[1]]
    g = 0
    for r in rest:
        g = math.gcd(g, r[0])
    return (g, 0), (piv[0] % g, piv[1])


def ideal_lattice(D, content, a, b):
    """content * [a, (-b + sqrt D)/2] in the basis (1, w)."""
    # (-b + sqrt D)/2 = (-b - s)/2 + w, where sqrt D = 2w - s, s = D mod 2
    s = D % 2
    return hnf2([(content * a, 0), (content * (-b - s) // 2, content)])


def lattice_product(D, L1, L2):
    t, n = omega_mult(D)
    prods = []
    for (u1, v1), (u2, v2) in product(L1, L2):
        # (u1 + v1 w)(u2 + v2 w) = u1u2 + n v1v2 + (u1v2 + u2v1 + t v1v2) w
        prods.append((u1 * u2 + n * v1 * v2, u1 * v2 + u2 * v1 + t * v1 * v2))
    return hnf2(prods)


def fq2_squares(q, r):
    sq = set()
    for u in range(q):
        for v in range(q):
            if u or v:
                sq.add(((u * u + r * v * v) % q, (2 * u * v) % q))
    return sq


def two_ramified(d):
    """Is 2 ramified in Q(sqrt d)?"""
    core = d
    for p in range(2, int(abs(d) ** 0.5) + 2):
        while core % (p * p) == 0:
            core //= p * p
    return core % 4 != 1


# ------------------------------------------------ Frobenius / Kummer oracles

def pinned_b(D, ell):
    """Least b >= 0 with b^2 = D mod 4 ell (the pinned prime above ell)."""
    return next(b for b in range(2 * ell) if (b * b - D) % (4 * ell) == 0)


def residue_bit_brute(m, D, A, B, den, q):
    """0/1 according as (A + B sqrt m)/den is a square at the pinned prime above q.

    Split q: sqrt D = b at the pinned prime.  Inert q: squares of
    F_q[t]/(t^2 - m) are enumerated outright.
    """
    if legendre_brute(m, q) == 1:
        b = pinned_b(D, q)
        s = b * pow(2, -1, q) % q if D % 4 == 0 else b % q
        v = (A + B * s) * pow(den, -1, q) % q
        return 0 if legendre_brute(v, q) == 1 else 1
    target = (A * pow(den, -1, q) % q, B * pow(den, -1, q) % q)
    for a, b in product(range(q), repeat=2):
        if ((a * a + b * b * m) % q, 2 * a * b % q) == target:
            return 0
    return 1


def squarefree_divisors(primes):
    out = []
    for k in range(len(primes) + 1):
        for mask in product((0, 1), repeat=len(primes)):
            if sum(mask) == k:
                out.append(math.prod(p for p, e in zip(primes, mask) if e))
    return out


def gras_exists_q_brute(T, S):
    """Over Q: is there a real quadratic field unramified at 2, ramified exactly at T,
    in which every l in S splits?  The only candidate is Q(sqrt(prod T))."""
    d = math.prod(T)
    if d % 4 != 1:
        return False
    return all(legendre_brute(d, l) == 1 for l in S)


def h1_dims_q_brute(T, sigma):
    """dim H1(G_T) and dim H1(G_T^Sigma) over Q by listing the fields Q(sqrt d)."""
    ds = [d for d in squarefree_divisors(list(T)) if d % 4 == 1]
    ds_sig = [d for d in ds if all(legendre_brute(d, l) == 1 for l in sigma)]
    return int(math.log2(len(ds))), int(math.log2(len(ds_sig)))


def m_dim_q_brute(sigma, T):
    """dim of the classes x in <-1, Sigma, T> that are local squares at every q in T."""
    gens = [-1] + list(sigma) + list(T)
    good = 0
    for mask in product((0, 1), repeat=len(gens)):
        x = math.prod(g for g, e in zip(gens, mask) if e)
        if all(x % q != 0 and legendre_brute(x, q) == 1 for q in T):
            good += 1
    return int(math.log2(good))


def primes_upto(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]
