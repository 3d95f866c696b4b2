"""Exact arithmetic in multiquadratic fields Q(sqrt a_1, ..., sqrt a_k).

Elements are tuples of 2^k Fractions; index ``mask`` holds the coefficient of
prod_{i in mask} sqrt(a_i).  Square roots are extracted down the tower
Q(sqrt a_1..a_{k-1})(sqrt a_k), so no floating point is involved.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from . import arith
from .errors import DomainError

MAX_RADICANDS = 3


class MQField:
    def __init__(self, radicands):
        rads = [int(a) for a in radicands]
        if len(rads) > MAX_RADICANDS:
            raise DomainError("multiquadratic fields of degree > 8 are out of supported scope")
        for a in rads:
            if arith.squarefree_part(a) != (a, 1) or a == 1:
                raise DomainError(f"radicand {a} is not a squarefree integer != 1")
        # independence modulo squares
        for mask in range(1, 1 << len(rads)):
            p = 1
            for i, a in enumerate(rads):
                if mask >> i & 1:
                    p *= a
            if arith.is_square(p):
                raise DomainError(f"radicands {rads} are dependent modulo squares")
        self.rads = rads
        self.k = len(rads)
        self.n = 1 << self.k
        self._table = {}
        for S, T in product(range(self.n), repeat=2):
            c = 1
            for i in range(self.k):
                if (S >> i & 1) and (T >> i & 1):
                    c *= rads[i]
            self._table[S, T] = (S ^ T, c)

    @property
    def degree(self):
        return self.n

    def __repr__(self):
        return f"MQField({self.rads})"

    # --------------------------------------------------------- construction

    def zero(self):
        return (Fraction(0),) * self.n

    def one(self):
        return self.scalar(1)

    def scalar(self, r):
        return (Fraction(r),) + (Fraction(0),) * (self.n - 1)

    def basis(self, mask):
        out = [Fraction(0)] * self.n
        out[mask] = Fraction(1)
        return tuple(out)

    def sqrt_of_int(self, m: int):
        """The element sqrt(m) for squarefree m in the span of the radicands."""
        core, f = arith.squarefree_part(m)
        for mask in range(self.n):
            p = 1
            for i in range(self.k):
                if mask >> i & 1:
                    p *= self.rads[i]
            q = Fraction(core, p)
            r = arith.rational_sqrt(q)
            if r is not None:
                # sqrt(core) = r * basis(mask) since core = r^2 * p
                x = [Fraction(0)] * self.n
                x[mask] = r * f
                return tuple(x)
        raise DomainError(f"sqrt({m}) does not lie in Q(sqrt {self.rads})")

    def embed(self, x) -> tuple:
        """Embed a rational or an element a + b sqrt m of a quadratic subfield."""
        if not hasattr(x, "m"):
            return self.scalar(x)
        return self.add(self.scalar(x.a), self.scale(self.sqrt_of_int(x.m), x.b))

    # ------------------------------------------------------------ arithmetic

    def add(self, x, y):
        return tuple(a + b for a, b in zip(x, y))

    def sub(self, x, y):
        return tuple(a - b for a, b in zip(x, y))

    def neg(self, x):
        return tuple(-a for a in x)

    def scale(self, x, r):
        r = Fraction(r)
        return tuple(a * r for a in x)

    def mul(self, x, y):
        out = [Fraction(0)] * self.n
        for S, a in enumerate(x):
            if not a:
                continue
            for T, b in enumerate(y):
                if not b:
                    continue
                U, c = self._table[S, T]
                out[U] += a * b * c
        return tuple(out)

    def pow(self, x, e: int):
        if e < 0:
            return self.pow(self.inverse(x), -e)
        acc, base = self.one(), x
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def is_zero(self, x):
        return not any(x)

    def _split(self, x):
        h = self.n // 2
        return x[:h], x[h:]

    def inverse(self, x):
        if self.is_zero(x):
            raise ZeroDivisionError("inverse of zero")
        if self.k == 0:
            return (1 / x[0],)
        sub = _subfield(self.rads)
        u, v = self._split(x)
        a = self.rads[-1]
        N = sub.sub(sub.mul(u, u), sub.scale(sub.mul(v, v), a))
        Ninv = sub.inverse(N)
        return sub.mul(u, Ninv) + sub.neg(sub.mul(v, Ninv))

    def div(self, x, y):
        return self.mul(x, self.inverse(y))

    def sqrt(self, x):
        """A square root of x, or None."""
        if self.is_zero(x):
            return x
        if self.k == 0:
            r = arith.rational_sqrt(x[0])
            return None if r is None else (r,)
        sub = _subfield(self.rads)
        a = self.rads[-1]
        u, v = self._split(x)
        if sub.is_zero(v):
            r = sub.sqrt(u)
            if r is not None:
                return r + sub.zero()
            r = sub.sqrt(sub.scale(u, Fraction(1, a)))
            if r is not None:
                return sub.zero() + r
            return None
        N = sub.sub(sub.mul(u, u), sub.scale(sub.mul(v, v), a))
        n = sub.sqrt(N)
        if n is None:
            return None
        for s in (n, sub.neg(n)):
            w = sub.scale(sub.add(u, s), Fraction(1, 2))
            if sub.is_zero(w):
                continue
            r = sub.sqrt(w)
            if r is None:
                continue
            t = sub.mul(v, sub.inverse(sub.scale(r, 2)))
            cand = r + t
            if self.mul(cand, cand) == tuple(x):
                return cand
        return None

    def is_square(self, x) -> bool:
        return self.sqrt(x) is not None

    def norm_to_q(self, x) -> Fraction:
        """Absolute norm, via the tower."""
        if self.k == 0:
            return x[0]
        sub = _subfield(self.rads)
        u, v = self._split(x)
        a = self.rads[-1]
        return sub.norm_to_q(sub.sub(sub.mul(u, u), sub.scale(sub.mul(v, v), a)))

    def to_text(self, x) -> str:
        terms = []
        for mask, c in enumerate(x):
            if not c:
                continue
            names = "·".join(f"√{self.rads[i]}" for i in range(self.k) if mask >> i & 1)
            terms.append(f"{c}" if mask == 0 else f"{c}*{names}")
        return " + ".join(terms) if terms else "0"


_SUBFIELDS: dict = {}


def _subfield(rads):
    key = tuple(rads[:-1])
    if key not in _SUBFIELDS:
        _SUBFIELDS[key] = MQField(key)
    return _SUBFIELDS[key]
