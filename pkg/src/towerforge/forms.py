"""Binary quadratic forms a x^2 + b x y + c y^2 of nonsquare discriminant.

Matrices are 2x2 integer tuples ((p, q), (r, s)) acting on column vectors;
``f.transform(M)`` is the form (x, y) -> f(M (x, y)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Matrix = tuple[tuple[int, int], tuple[int, int]]
IDENTITY: Matrix = ((1, 0), (0, 1))


def matmul(m: Matrix, n: Matrix) -> Matrix:
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


@dataclass(frozen=True, order=True)
class Form:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def transform(self, m: Matrix) -> "Form":
        (p, q), (r, s) = m
        a, b, c = self.a, self.b, self.c
        return Form(a * p * p + b * p * r + c * r * r,
                    2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
                    a * q * q + b * q * s + c * s * s)

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def inverse(self) -> "Form":
        return Form(self.a, -self.b, self.c)

    def negate(self) -> "Form":
        return Form(-self.a, self.b, -self.c)

    def as_tuple(self):
        return (self.a, self.b, self.c)


def principal_form(D: int) -> Form:
    b = D % 2
    return Form(1, b, (b * b - D) // 4)


# ---------------------------------------------------------------- definite

def is_reduced_definite(f: Form) -> bool:
    a, b, c = f.a, f.b, f.c
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce_definite(f: Form) -> tuple[Form, Matrix]:
    """Reduce a positive definite form; returns (g, M) with f.transform(M) == g."""
    if f.disc >= 0 or f.a <= 0:
        raise ValueError(f"not a positive definite form: {f}")
    M = IDENTITY
    while True:
        a, b, c = f.a, f.b, f.c
        # normalise b into (-a, a]
        t = (a - b) // (2 * a)
        if t:
            step = ((1, t), (0, 1))
            f = f.transform(step)
            M = matmul(M, step)
            a, b, c = f.a, f.b, f.c
        if a > c or (a == c and b < 0):
            step = ((0, -1), (1, 0))
            f = f.transform(step)
            M = matmul(M, step)
            continue
        return f, M


def reduced_forms_definite(D: int) -> list[Form]:
    """All primitive reduced positive definite forms of discriminant D < 0."""
    out = []
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append(Form(a, b, c))
    return out


# -------------------------------------------------------------- indefinite

def is_reduced_indefinite(f: Form) -> bool:
    D = f.disc
    s = math.isqrt(D)
    a, b = abs(f.a), f.b
    # |sqrt(D) - 2|a|| < b < sqrt(D)
    return 0 < b <= s and 2 * a + b > s and 2 * a - b <= s


def rho(f: Form) -> tuple[Form, Matrix]:
    """One reduction step (a, b, c) -> (c, r, (r^2 - D)/4c) with its matrix."""
    D = f.disc
    s = math.isqrt(D)
    c = f.c
    ac = abs(c)
    if ac > s:
        # -|c| < r <= |c|
        r = (-f.b) % (2 * ac)
        if r > ac:
            r -= 2 * ac
    else:
        # largest r <= s with r = -b mod 2|c|
        r = s - ((s + f.b) % (2 * ac))
    t = (r + f.b) // (2 * c)
    step = ((0, -1), (1, t))
    g = f.transform(step)
    assert g.a == c and g.b == r, (f, g)
    return g, step


def reduce_indefinite(f: Form, max_steps: int = 100000) -> tuple[Form, Matrix]:
    if f.disc <= 0:
        raise ValueError(f"not an indefinite form: {f}")
    M = IDENTITY
    for _ in range(max_steps):
        if is_reduced_indefinite(f):
            return f, M
        f, step = rho(f)
        M = matmul(M, step)
    raise RuntimeError("indefinite reduction did not terminate")


def reduced_forms_indefinite(D: int) -> list[Form]:
    """All primitive reduced indefinite forms of discriminant D > 0."""
    s = math.isqrt(D)
    out = []
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        n = (D - b * b) // 4  # = -a c > 0
        if n == 0:
            continue
        for a in _divisors(n):
            if not (2 * a + b > s and 2 * a - b <= s):
                continue
            for sa in (a, -a):
                f = Form(sa, b, -n // sa)
                if f.is_primitive():
                    out.append(f)
    return out


def cycle(f: Form) -> list[Form]:
    """The rho-cycle of a reduced indefinite form."""
    out = [f]
    g, _ = rho(f)
    while g != f:
        out.append(g)
        g, _ = rho(g)
    return out


def _divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]


# ------------------------------------------------------------- composition

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(u, v, g) with u a + v b = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return x0, y0, a


def compose(f1: Form, f2: Form) -> tuple[int, Form]:
    """Dirichlet composition (Shanks' arrangement), unreduced.

    Returns (d, f3): for primitive ideals [a_i, (-b_i + sqrt D)/2] the product
    is d * [a3, (-b3 + sqrt D)/2].
    """
    D = f1.disc
    if f2.disc != D:
        raise ValueError("discriminants differ")
    if f1.a > f2.a:
        f1, f2 = f2, f1
    a1, b1, _ = f1.a, f1.b, f1.c
    a2, b2, c2 = f2.a, f2.b, f2.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, abs(a1)
    else:
        u, _, d = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        u, v, d1 = _xgcd(s, d)
        x2, y2 = u, -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    num = b3 * b3 - D
    assert num % (4 * a3) == 0
    return d1, Form(a3, b3, num // (4 * a3))
