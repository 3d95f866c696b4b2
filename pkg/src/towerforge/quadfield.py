"""Arithmetic of Q and of quadratic fields Q(sqrt D).

Elements of Q(sqrt m) are ``QElt(m, a, b) = a + b*sqrt(m)`` with rational
a, b and m squarefree; D denotes the fundamental discriminant.  Ideals are
``Ideal(content, a, b) = content * [a, (-b + sqrt D)/2]``, matching the form
(a, b, (b^2 - D)/4a).

Pinned conventions (recorded in certificates):

* the prime above a non-inert rational prime l is [l, (-b + sqrt D)/2] with b
  the smallest nonnegative solution of b^2 = D mod 4l, so sqrt(D) = b mod it;
* F_{q^2} is F_q[t]/(t^2 - r) with r the smallest quadratic nonresidue;
* generators of principal ideals are balanced by powers of the fundamental
  unit (minimal max(a^2, b^2 |m|)) and made positive.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

from . import arith
from .abelian import AbelianGroup, quotient_invariants
from .errors import DomainError, ResourceError
from .forms import (Form, compose, cycle, principal_form, reduce_definite,
                    reduce_indefinite, reduced_forms_definite,
                    reduced_forms_indefinite, rho, matmul)

DEFAULT_MAX_DEFINITE = 10 ** 6
DEFAULT_MAX_INDEFINITE = 10 ** 5

PRIME_CONVENTION = "prime above l: [l, (-b+sqrt D)/2], b = least b >= 0 with b^2 = D mod 4l"
FQ2_CONVENTION = "F_q^2 = F_q[t]/(t^2 - r), r least nonresidue mod q"
UNIT_CONVENTION = "generators balanced by powers of the fundamental unit, then made positive"


def disc_caps() -> tuple[int, int]:
    env = os.environ.get("TOWERFORGE_MAX_DISC")
    if env:
        n = int(env)
        return n, n
    return DEFAULT_MAX_DEFINITE, DEFAULT_MAX_INDEFINITE


# ------------------------------------------------------------------ elements

class QElt:
    __slots__ = ("m", "a", "b")

    def __init__(self, m: int, a, b=0):
        self.m = m
        self.a = Fraction(a)
        self.b = Fraction(b)

    def _coerce(self, other):
        if isinstance(other, QElt):
            if other.m != self.m:
                raise DomainError("elements of different fields")
            return other
        return QElt(self.m, other)

    def __add__(self, other):
        o = self._coerce(other)
        return QElt(self.m, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QElt(self.m, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QElt(self.m, self.a * o.a + self.m * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self):
        return QElt(self.m, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.m * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QElt(self.m, self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc, base = QElt(self.m, 1), self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def __eq__(self, other):
        if isinstance(other, QElt):
            return self.m == other.m and self.a == other.a and self.b == other.b
        try:
            return self.b == 0 and self.a == Fraction(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.m, self.a, self.b))

    def is_zero(self):
        return self.a == 0 and self.b == 0

    def is_rational(self):
        return self.b == 0

    def xyd(self) -> tuple[int, int, int]:
        """(x, y, denom) with self = (x + y sqrt m) / denom."""
        den = math.lcm(self.a.denominator, self.b.denominator)
        return int(self.a * den), int(self.b * den), den

    def height(self) -> Fraction:
        """max(a^2, b^2 |m|)."""
        return max(self.a * self.a, self.b * self.b * abs(self.m))

    def __repr__(self):
        return f"QElt({self.m}, {self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        x, y, d = self.xyd()
        rad = f"{abs(y) if abs(y) != 1 else ''}√{self.m}"
        if x == 0:
            s = rad if y > 0 else "-" + rad
        else:
            s = f"{x}{'+' if y > 0 else '-'}{rad}"
        return s if d == 1 else f"({s})/{d}"


def _sign_of(a: Fraction, b: Fraction, D: int) -> int:
    """Sign of a + b*sqrt(D) for D > 0."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa >= 0 and sb >= 0:
        return 1 if (sa or sb) else 0
    if sa <= 0 and sb <= 0:
        return -1
    return sa if a * a > b * b * D else sb


# -------------------------------------------------------------------- primes

@dataclass(frozen=True)
class Prime:
    """A prime of Q or of a quadratic field.

    kind is 'rational', 'split', 'inert' or 'ramified'; b pins the prime
    above a non-inert l as [l, (-b + sqrt D)/2].
    """

    disc: int
    ell: int
    kind: str
    b: int | None = None

    @property
    def degree(self) -> int:
        return 2 if self.kind == "inert" else 1

    @property
    def norm(self) -> int:
        return self.ell ** self.degree

    def label(self) -> str:
        if self.kind in ("rational", "inert"):
            return f"({self.ell})"
        return f"[{self.ell}, ({-self.b}+√{self.disc})/2]"

    def to_json(self):
        return {"ell": self.ell, "kind": self.kind, "b": self.b, "label": self.label()}


@dataclass(frozen=True)
class UnitData:
    x: int
    y: int
    denom: int
    norm: int
    regulator_period: int
    D: int

    @property
    def element(self) -> QElt:
        """(x + y sqrt D)/denom as an element a + b sqrt m."""
        scale = 2 if self.D % 4 == 0 else 1
        m = self.D // (scale * scale)
        return QElt(m, Fraction(self.x, self.denom), Fraction(self.y * scale, self.denom))

    def to_json(self):
        return {"x": self.x, "y": self.y, "denom": self.denom, "norm": self.norm,
                "regulator_period": self.regulator_period, "text": str(self.element)}


@dataclass
class ClassGroup:
    elementary_divisors: list[int]
    generators: list[Form]
    narrow_flag: bool
    order: int
    disc: int
    _group: AbelianGroup | None = field(default=None, repr=False, compare=False)

    @property
    def two_rank(self) -> int:
        return sum(1 for d in self.elementary_divisors if d % 2 == 0)

    @property
    def two_part(self) -> list[int]:
        return [2 ** arith.valuation(d, 2) for d in self.elementary_divisors if d % 2 == 0]

    @property
    def two_order(self) -> int:
        return math.prod(self.two_part)

    def to_json(self):
        return {"disc": self.disc, "narrow": self.narrow_flag, "order": self.order,
                "elementary_divisors": self.elementary_divisors,
                "generators": [g.as_tuple() for g in self.generators],
                "two_part": self.two_part}


@dataclass(frozen=True)
class Ideal:
    content: int
    a: int
    b: int

    def norm(self) -> int:
        return self.content * self.content * self.a


# -------------------------------------------------------------------- fields

class Rationals:
    disc = 1
    degree = 1
    signature = (1, 0)
    is_real = True

    def __repr__(self):
        return "Q"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def label(self) -> str:
        return "Q"

    def to_json(self):
        return {"field": "Q", "disc": 1}

    def elt(self, x) -> Fraction:
        return Fraction(x)

    @property
    def one(self):
        return Fraction(1)

    def norm(self, x):
        return Fraction(x)

    def is_square(self, x) -> bool:
        return arith.is_rational_square(Fraction(x))

    def sqrt(self, x):
        return arith.rational_sqrt(Fraction(x))

    def is_totally_positive(self, x) -> bool:
        return Fraction(x) > 0

    def real_signs(self, x) -> list[int]:
        return [1 if Fraction(x) > 0 else -1]

    def canonical_square_class(self, x) -> int:
        x = Fraction(x)
        core, _ = arith.squarefree_part(x.numerator * x.denominator)
        return core

    def splitting_type(self, ell: int) -> str:
        return "rational"

    def pinned_prime(self, ell: int) -> Prime:
        return Prime(1, ell, "rational")

    def primes_above(self, ell: int) -> list[Prime]:
        return [self.pinned_prime(ell)]

    def valuation(self, x, P: Prime) -> int:
        return arith.frac_valuation(Fraction(x), P.ell)

    def unit_residue_symbol(self, x, P: Prime) -> int:
        x = Fraction(x)
        v = arith.frac_valuation(x, P.ell)
        u = x / Fraction(P.ell) ** v
        return arith.kronecker(arith.frac_mod(u, P.ell), P.ell)

    def residue_symbol(self, x, P: Prime) -> int:
        return _residue_symbol(self, x, P)

    def local_square_bit(self, x, P: Prime) -> int:
        return _local_square_bit(self, x, P)

    def dyadic_unramified(self, x) -> dict[str, bool]:
        x = Fraction(x)
        v = arith.frac_valuation(x, 2)
        if v % 2:
            return {"(2)": False}
        u = x / Fraction(2) ** v
        return {"(2)": arith.frac_mod(u, 4) == 1}

    def odd_support(self, x) -> list[Prime]:
        x = Fraction(x)
        ps = set(arith.factorint(x.numerator)) | set(arith.factorint(x.denominator))
        return [Prime(1, p, "rational") for p in sorted(ps) if p != 2]

    def class_number(self) -> int:
        return 1

    def class_group(self, narrow: bool = False) -> ClassGroup:
        return ClassGroup([], [], narrow, 1, 1)

    def unit_generators(self):
        return [("torsion_unit", Fraction(-1))]

    def hilbert_symbol(self, a, b, p) -> int:
        return hilbert_symbol_q(Fraction(a), Fraction(b), p)


QQ = Rationals()


def fundamental_discriminant(m: int) -> "QuadField":
    """The quadratic field Q(sqrt m)."""
    if m == 0 or arith.is_square(m):
        raise DomainError(f"Q(sqrt {m}) is not a quadratic field")
    core, _ = arith.squarefree_part(m)
    D = core if core % 4 == 1 else 4 * core
    return QuadField(D)


def is_fundamental(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return arith.squarefree_part(D)[1] == 1
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and arith.squarefree_part(m)[1] == 1
    return False


def field_from_spec(spec) -> Union[Rationals, "QuadField"]:
    """'Q' / 'QQ' / '1' -> Q; an integer m -> Q(sqrt m); 'D=<disc>' -> discriminant."""
    if isinstance(spec, (Rationals, QuadField)):
        return spec
    s = str(spec).strip()
    if s.upper() in ("Q", "QQ", "1"):
        return QQ
    if s.upper().startswith("D="):
        return QuadField(int(s[2:]))
    return fundamental_discriminant(int(s))


class QuadField:
    degree = 2

    def __init__(self, D: int):
        if not is_fundamental(D):
            raise DomainError(f"{D} is not a fundamental discriminant")
        self.disc = D
        self.m = D if D % 4 == 1 else D // 4
        self.is_real = D > 0
        self.signature = (2, 0) if D > 0 else (0, 1)
        self._cg: dict = {}

    # -------------------------------------------------------------- basics

    def __repr__(self):
        return f"QuadField({self.disc})"

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.disc == self.disc

    def __hash__(self):
        return hash(("K", self.disc))

    def __getstate__(self):
        return {"disc": self.disc}

    def __setstate__(self, state):
        self.__init__(state["disc"])

    def label(self) -> str:
        return f"Q(√{self.m})"

    def to_json(self):
        return {"field": self.label(), "disc": self.disc, "signature": list(self.signature)}

    def elt(self, a, b=0) -> QElt:
        if isinstance(a, QElt):
            return a
        return QElt(self.m, a, b)

    @property
    def one(self):
        return QElt(self.m, 1)

    @property
    def sqrtD(self) -> QElt:
        return QElt(self.m, 0, 2 if self.disc % 4 == 0 else 1)

    @property
    def omega(self) -> QElt:
        if self.disc % 4 == 1:
            return QElt(self.m, Fraction(1, 2), Fraction(1, 2))
        return QElt(self.m, 0, 1)

    def from_xy(self, x, y, denom=1) -> QElt:
        """(x + y sqrt D) / denom."""
        return self.from_dcoords(Fraction(x, denom), Fraction(y, denom))

    def from_dcoords(self, a, beta) -> QElt:
        return QElt(self.m, a, Fraction(beta) * (2 if self.disc % 4 == 0 else 1))

    def dcoords(self, x) -> tuple[Fraction, Fraction]:
        """(a, beta) with x = a + beta sqrt D."""
        x = self.elt(x)
        return x.a, (x.b / 2 if self.disc % 4 == 0 else x.b)

    def norm(self, x) -> Fraction:
        return self.elt(x).norm()

    def is_integral(self, x) -> bool:
        x = self.elt(x)
        t, n = x.trace(), x.norm()
        return t.denominator == 1 and n.denominator == 1

    def is_square(self, x) -> bool:
        return self.sqrt(x) is not None

    def sqrt(self, x) -> QElt | None:
        """A square root of x in K, or None."""
        x = self.elt(x)
        m = self.m
        if x.is_zero():
            return x
        if x.b == 0:
            r = arith.rational_sqrt(x.a)
            if r is not None:
                return QElt(m, r)
            r = arith.rational_sqrt(x.a / m)
            if r is not None:
                return QElt(m, 0, r)
            return None
        n = arith.rational_sqrt(x.norm())
        if n is None:
            return None
        for s in (n, -n):
            u2 = (x.a + s) / 2
            u = arith.rational_sqrt(u2)
            if u is None or u == 0:
                continue
            cand = QElt(m, u, x.b / (2 * u))
            if cand * cand == x:
                return cand
        return None

    def real_signs(self, x) -> list[int]:
        x = self.elt(x)
        if not self.is_real:
            return []
        return [_sign_of(x.a, x.b, self.m), _sign_of(x.a, -x.b, self.m)]

    def is_totally_positive(self, x) -> bool:
        if not self.is_real:
            return True
        return all(s > 0 for s in self.real_signs(x))

    def canonical_square_class(self, x) -> QElt:
        """Square-class representative: x divided by the largest rational square in its content."""
        x = self.elt(x)
        den = math.lcm(x.a.denominator, x.b.denominator)
        # clear denominators with a square
        x = x * (den * den)
        g = math.gcd(int(x.a), int(x.b))
        if g:
            _, f = arith.squarefree_part(g)
            x = x / (f * f)
        return x

    # --------------------------------------------------------- class groups

    def _check_cap(self):
        cap_def, cap_ind = disc_caps()
        cap = cap_ind if self.is_real else cap_def
        if abs(self.disc) > cap:
            raise ResourceError(
                f"|D| = {abs(self.disc)} exceeds the class-group enumeration bound {cap} "
                "(set TOWERFORGE_MAX_DISC to override)")

    @cached_property
    def _narrow_canon(self) -> dict:
        """Reduced indefinite form -> canonical representative of its narrow class."""
        self._check_cap()
        out = {}
        for f in reduced_forms_indefinite(self.disc):
            if f in out:
                continue
            cyc = cycle(f)
            rep = min(g for g in cyc if g.a > 0)
            for g in cyc:
                out[g] = rep
        return out

    def reduce(self, f: Form) -> Form:
        if self.is_real:
            return reduce_indefinite(f)[0]
        return reduce_definite(f)[0]

    def canonical(self, f: Form, narrow: bool = False) -> Form:
        if not self.is_real:
            return reduce_definite(f)[0]
        rep = self._narrow_canon[reduce_indefinite(f)[0]]
        if narrow:
            return rep
        other = self._narrow_canon[reduce_indefinite(f.negate())[0]]
        return min(rep, other)

    def class_reps(self, narrow: bool = False) -> list[Form]:
        if not self.is_real:
            self._check_cap()
            return reduced_forms_definite(self.disc)
        return sorted({self.canonical(f, narrow) for f in self._narrow_canon})

    def group(self, narrow: bool = False) -> AbelianGroup:
        key = bool(narrow) and self.is_real
        if key not in self._cg:
            op = lambda x, y: self.canonical(compose(x, y)[1], key)  # noqa: E731
            ident = self.canonical(principal_form(self.disc), key)
            self._cg[key] = AbelianGroup(ident, op, self.class_reps(key))
        return self._cg[key]

    def class_group(self, narrow: bool = False) -> ClassGroup:
        G = self.group(narrow)
        return ClassGroup(list(G.invariants), list(G.generators), bool(narrow) and self.is_real,
                          G.order(), self.disc, G)

    def class_number(self, narrow: bool = False) -> int:
        return self.group(narrow).order()

    def form_class(self, f: Form, narrow: bool = False) -> Form:
        return self.canonical(f, narrow and self.is_real)

    def ideal_class(self, I: Ideal) -> Form:
        return self.canonical(self.ideal_form(I))

    def ideal_form(self, I: Ideal) -> Form:
        return Form(I.a, I.b, (I.b * I.b - self.disc) // (4 * I.a))

    # ----------------------------------------------------------------- units

    @cached_property
    def _unit(self) -> UnitData:
        if not self.is_real:
            raise DomainError("imaginary quadratic fields have no fundamental unit")
        D = self.disc
        s = math.isqrt(D)
        # complete quotients (P + sqrt D)/Q of omega; x_1, x_2, ... is purely periodic
        P, Q = (1, 2) if D % 4 == 1 else (0, 2)
        a0 = (P + s) // Q
        P = a0 * Q - P
        Q = (D - P * P) // Q
        start = (P, Q)
        eps = self.one
        period = 0
        while True:
            eps = eps * self.from_xy(P, 1, Q)
            period += 1
            a = (P + s) // Q
            P = a * Q - P
            Q = (D - P * P) // Q
            if (P, Q) == start:
                break
        n = eps.norm()
        if abs(n) != 1 or not self.is_integral(eps):
            raise AssertionError(f"continued fraction produced a non-unit {eps}")
        a, beta = self.dcoords(eps)
        d = math.lcm(a.denominator, beta.denominator)
        return UnitData(int(a * d), int(beta * d), d, int(n), period, D)

    def fundamental_unit(self) -> UnitData:
        return self._unit

    def torsion_generator(self) -> QElt:
        """Generator of W_K modulo squares."""
        if self.disc == -4:
            return QElt(-1, 0, 1)  # i
        return QElt(self.m, -1)

    def roots_of_unity_order(self) -> int:
        return {-4: 4, -3: 6}.get(self.disc, 2)

    def unit_generators(self):
        out = [("torsion_unit", self.torsion_generator())]
        if self.is_real:
            out.append(("fundamental_unit", self._unit.element))
        return out

    def _torsion_units(self) -> list[QElt]:
        m = self.m
        if m == -1:
            i = QElt(m, 0, 1)
            return [QElt(m, 1), i, QElt(m, -1), -i]
        if m == -3:
            z = QElt(m, Fraction(1, 2), Fraction(1, 2))
            return [z ** k for k in range(6)]
        return [QElt(m, 1), QElt(m, -1)]

    # ---------------------------------------------------------------- primes

    def splitting_type(self, ell: int) -> str:
        k = arith.kronecker(self.disc, ell)
        return {1: "split", -1: "inert", 0: "ramified"}[k]

    def prime_root(self, ell: int) -> int:
        """Least b >= 0 with b^2 = D mod 4 ell."""
        D = self.disc
        if ell == 2:
            for b in range(0, 5):
                if (b * b - D) % 8 == 0:
                    return b
            raise DomainError(f"2 is inert in {self.label()}")
        if D % ell == 0:
            roots = [0]
        elif arith.kronecker(D, ell) == 1:
            s = arith.sqrt_mod(D, ell)
            roots = [s, ell - s]
        else:
            raise DomainError(f"{ell} is inert in {self.label()}")
        # b = r mod l and b = D mod 2 gives b^2 = D mod 4l
        return min(r if (r - D) % 2 == 0 else r + ell for r in roots)

    def pinned_prime(self, ell: int) -> Prime:
        kind = self.splitting_type(ell)
        if kind == "inert":
            return Prime(self.disc, ell, "inert")
        return Prime(self.disc, ell, kind, self.prime_root(ell))

    def conjugate_prime(self, P: Prime) -> Prime:
        if P.kind != "split":
            return P
        return Prime(self.disc, P.ell, "split", (-P.b) % (2 * P.ell))

    def primes_above(self, ell: int) -> list[Prime]:
        P = self.pinned_prime(ell)
        if P.kind == "split":
            return [P, self.conjugate_prime(P)]
        return [P]

    def prime_ideal(self, P: Prime) -> Ideal:
        if P.kind == "inert":
            return Ideal(P.ell, 1, self.disc % 2)
        return Ideal(1, P.ell, P.b)

    def prime_form(self, P: Prime) -> Form:
        if P.kind == "inert":
            raise DomainError(f"{P.ell} is inert in {self.label()}")
        return Form(P.ell, P.b, (P.b * P.b - self.disc) // (4 * P.ell))

    def prime_ideal_class(self, ell: int) -> Form:
        P = self.pinned_prime(ell)
        if P.kind == "inert":
            raise DomainError(f"{ell} is inert in {self.label()}; its ideal is principal")
        return self.canonical(self.prime_form(P))

    # ---------------------------------------------------------------- ideals

    def unit_ideal(self) -> Ideal:
        return Ideal(1, 1, self.disc % 2)

    def _normal_ideal(self, content, a, b) -> Ideal:
        b %= 2 * a
        if b > a:
            b -= 2 * a
        return Ideal(content, a, b)

    def ideal_mul(self, I: Ideal, J: Ideal) -> Ideal:
        d, f = compose(self.ideal_form(I), self.ideal_form(J))
        return self._normal_ideal(I.content * J.content * d, f.a, f.b)

    def ideal_pow(self, I: Ideal, k: int) -> Ideal:
        acc, base = self.unit_ideal(), I
        while k:
            if k & 1:
                acc = self.ideal_mul(acc, base)
            base = self.ideal_mul(base, base)
            k >>= 1
        return acc

    def ideal_conj(self, I: Ideal) -> Ideal:
        return self._normal_ideal(I.content, I.a, -I.b)

    def ideal_contains(self, I: Ideal, x) -> bool:
        a, beta = self.dcoords(self.elt(x) / I.content)
        # x = u a + v (-b + sqrt D)/2
        v = 2 * beta
        u = (a + v * Fraction(I.b, 2)) / I.a
        return u.denominator == 1 and v.denominator == 1

    def principal_generator(self, I: Ideal) -> QElt | None:
        """A generator of I (balanced and normalised), or None if I is not principal."""
        g = Form(I.a, -I.b, (I.b * I.b - self.disc) // (4 * I.a))
        xy = self._represent_unit_value(g)
        if xy is None:
            return None
        x, y = xy
        gamma = self.from_dcoords(I.a * x - Fraction(I.b * y, 2), Fraction(y, 2)) * I.content
        assert abs(gamma.norm()) == I.norm(), (I, gamma)
        return self.normalize_generator(gamma)

    def _represent_unit_value(self, g: Form):
        """(x, y) with g(x, y) = +-1, or None."""
        if not self.is_real:
            h, M = reduce_definite(g)
            if h.a != 1:
                return None
            return M[0][0], M[1][0]
        h, M = reduce_indefinite(g)
        start = h
        while True:
            if abs(h.a) == 1:
                return M[0][0], M[1][0]
            h, step = rho(h)
            M = matmul(M, step)
            if h == start:
                return None

    def normalize_generator(self, gamma: QElt) -> QElt:
        if not self.is_real:
            cands = [gamma * z for z in self._torsion_units()]
            return min(cands, key=lambda e: (e.a <= 0, e.b < 0, e.a, e.b))
        eps = self._unit.element
        inv = eps.inverse()
        best = gamma
        while True:
            moved = False
            for u in (eps, inv):
                c = best * u
                if c.height() < best.height():
                    best, moved = c, True
                    break
            if not moved:
                break
        ties = [best] + [best * u for u in (eps, inv) if (best * u).height() == best.height()]
        best = min(ties, key=lambda e: (abs(e.a), abs(e.b), e.a, e.b))
        if _sign_of(best.a, best.b, self.m) < 0:
            best = -best
        return best

    # ----------------------------------------------------- S-class / S-units

    def s_class_group(self, S) -> ClassGroup:
        G = self.group()
        sub = [self.canonical(self.prime_form(self.pinned_prime(l)))
               for l in sorted(S) if self.splitting_type(l) != "inert"]
        inv, lifts, _ = quotient_invariants(G, sub)
        return ClassGroup(inv, lifts, False, math.prod(inv), self.disc)

    def s_class_log(self, S):
        G = self.group()
        sub = [self.canonical(self.prime_form(self.pinned_prime(l)))
               for l in sorted(S) if self.splitting_type(l) != "inert"]
        return quotient_invariants(G, sub)

    def s_unit_generator(self, ell: int) -> tuple[int, QElt]:
        P = self.pinned_prime(ell)
        if P.kind == "inert":
            return 1, QElt(self.m, ell)
        G = self.group()
        k = G.element_order(self.canonical(self.prime_form(P)))
        I = self.ideal_pow(self.prime_ideal(P), k)
        gamma = self.principal_generator(I)
        if gamma is None:
            raise AssertionError(f"ideal {I} of trivial class has no generator")
        return k, gamma

    def ideal_from_exponents(self, primes: list[Prime], exps: list[int]) -> tuple[Ideal, int]:
        """Integral ideal J and rational r with  prod P_i^e_i = J / r."""
        J, r = self.unit_ideal(), 1
        for P, e in zip(primes, exps):
            if e >= 0:
                J = self.ideal_mul(J, self.ideal_pow(self.prime_ideal(P), e))
            else:
                Q = self.conjugate_prime(P) if P.kind != "inert" else P
                if P.kind == "inert":
                    r *= P.ell ** (-e)
                else:
                    J = self.ideal_mul(J, self.ideal_pow(self.prime_ideal(Q), -e))
                    r *= P.ell ** (-e)
        return J, r

    # ----------------------------------------------------------------- local

    def _ell_adic_image(self, x: QElt, P: Prime, prec: int) -> tuple[int, int]:
        """Image of x under the l-adic embedding attached to a split/ramified-free P,
        as (numerator mod l^prec, l-adic valuation of denominator)."""
        ell = P.ell
        mod = ell ** prec
        root = arith.hensel_sqrt(self.disc % mod if self.disc % ell else self.disc, ell, prec)
        if (root - P.b) % ell:
            root = (-root) % mod
        a, beta = self.dcoords(x)
        den = math.lcm(a.denominator, beta.denominator)
        A, B = int(a * den), int(beta * den)
        e = arith.valuation(den, ell)
        den_unit = den // ell ** e
        num = (A + B * root) * pow(den_unit, -1, mod) % mod
        return num, e

    def valuation(self, x, P: Prime) -> int:
        x = self.elt(x)
        if x.is_zero():
            raise DomainError("valuation of zero")
        ell = P.ell
        if P.kind == "inert":
            return min(arith.frac_valuation(c, ell) for c in (x.a, x.b) if c != 0)
        if P.kind == "ramified":
            return arith.frac_valuation(x.norm(), ell)
        prec = 8
        while True:
            num, e = self._ell_adic_image(x, P, prec)
            if num % ell ** prec:
                return arith.valuation(num, ell) - e
            prec *= 2

    def unit_residue_symbol(self, x, P: Prime) -> int:
        """Quadratic character of the unit part of x in the residue field at P."""
        x = self.elt(x)
        ell = P.ell
        v = self.valuation(x, P)
        if P.kind == "inert":
            u = x / Fraction(ell) ** v
            # sqrt(D) -> s * t in F_l[t]/(t^2 - r)
            r = arith.smallest_nonresidue(ell)
            s = arith.sqrt_mod(self.disc * pow(r, -1, ell) % ell, ell)
            ua, ub = self.dcoords(u)
            pair = (arith.frac_mod(ua, ell), arith.frac_mod(ub, ell) * s % ell)
            return arith.residue_power_test(pair, ell, 2, r)
        if P.kind == "ramified":
            u = x / self.sqrtD ** v
            return arith.kronecker(arith.frac_mod(u.a, ell), ell)
        prec = 8
        while True:
            num, e = self._ell_adic_image(x, P, prec)
            if num % ell ** prec:
                w = arith.valuation(num, ell)
                if prec - w >= 1:
                    return arith.kronecker(num // ell ** w, ell)
            prec *= 2

    def residue_symbol(self, x, P: Prime) -> int:
        return _residue_symbol(self, x, P)

    def local_square_bit(self, x, P: Prime) -> int:
        return _local_square_bit(self, x, P)

    def odd_support(self, x) -> list[Prime]:
        """Primes of K of odd residue characteristic where x has nonzero valuation."""
        x = self.elt(x)
        n = x.norm()
        den = math.lcm(x.a.denominator, x.b.denominator)
        cands = set(arith.factorint(n.numerator)) | set(arith.factorint(n.denominator)) \
            | set(arith.factorint(den))
        out = []
        for p in sorted(cands):
            if p == 2:
                continue
            for P in self.primes_above(p):
                if self.valuation(x, P) != 0:
                    out.append(P)
        return out

    # ---------------------------------------------------------------- dyadic

    def dyadic_primes(self) -> list[Prime]:
        kind = self.splitting_type(2)
        if kind == "inert":
            return [Prime(self.disc, 2, "inert")]
        b = self.prime_root(2)
        P = Prime(self.disc, 2, kind, b)
        if kind == "split":
            return [P, Prime(self.disc, 2, "split", (-b) % 4)]
        return [P]

    def dyadic_unramified(self, x) -> dict[str, bool]:
        """For each prime above 2: is K(sqrt x)/K unramified there?"""
        x = self.elt(x)
        D = self.disc
        out = {}
        kind = self.splitting_type(2)
        if kind == "split":
            prec = 64
            for P in self.dyadic_primes():
                while True:
                    mod = 1 << prec
                    root = arith.two_adic_sqrt(D % mod, prec)
                    # the prime [2, (-b + sqrt D)/2] has sqrt D = b mod 4
                    if (root - P.b) % 4:
                        root = (-root) % mod
                    xa, xb = self.dcoords(x)
                    den = math.lcm(xa.denominator, xb.denominator)
                    A, B = int(xa * den), int(xb * den)
                    e = arith.valuation(den, 2)
                    du = den >> e
                    num = (A + B * root) * pow(du, -1, mod) % mod
                    if num % mod and prec - arith.valuation(num, 2) >= 3:
                        w = arith.valuation(num, 2)
                        v = w - e
                        out[P.label()] = v % 2 == 0 and (num >> w) % 4 == 1
                        break
                    prec *= 2
            return out
        # inert or ramified: one prime, O_P = Z_2[w]
        P = self.dyadic_primes()[0]
        if kind == "inert":
            v = min(arith.frac_valuation(c, 2) for c in _omega_coords(x) if c != 0)
            if v % 2:
                out[P.label()] = False
                return out
            u = x / Fraction(2) ** v
            n = (D - 1) // 4
            sq = lambda y0, y1: (y0 * y0 + n * y1 * y1, 2 * y0 * y1 + y1 * y1)  # noqa: E731
        else:
            m = self.m
            v = arith.frac_valuation(x.norm(), 2)
            if v % 2:
                out[P.label()] = False
                return out
            pi = QElt(m, 0, 1) if m % 4 == 2 else QElt(m, 1, 1)
            u = x / pi ** v
            sq = lambda y0, y1: (y0 * y0 + m * y1 * y1, 2 * y0 * y1)  # noqa: E731
        c0, c1 = _omega_coords(u)
        r0, r1 = arith.frac_mod(c0, 4), arith.frac_mod(c1, 4)
        ok = any(((r0 - s0) % 4, (r1 - s1) % 4) == (0, 0)
                 for y0 in range(4) for y1 in range(4) for s0, s1 in [sq(y0, y1)])
        out[P.label()] = ok
        return out

    def hilbert_symbol_unit(self, u, x, P: Prime) -> int:
        """Hilbert symbol (u, x)_P for a P-unit u at an odd prime P."""
        v = self.valuation(x, P)
        if self.valuation(u, P) != 0:
            raise DomainError("first argument must be a unit at P")
        if v % 2 == 0:
            return 1
        return self.unit_residue_symbol(u, P)


def _omega_coords(x: QElt) -> tuple[Fraction, Fraction]:
    """Coordinates of x in the basis (1, w) of the maximal order."""
    if x.m % 4 == 1:
        # sqrt m = 2w - 1
        return x.a - x.b, 2 * x.b
    return x.a, x.b


def _residue_symbol(K, x, P: Prime) -> int:
    v = K.valuation(x, P)
    if v < 0:
        raise DomainError(f"{x} is not integral at {P.label()}")
    if v > 0:
        return 0
    return K.unit_residue_symbol(x, P)


def _local_square_bit(K, x, P: Prime) -> int:
    """0 if x is a square in the completion at the odd prime P, 1 if not.

    x must have even valuation at P.
    """
    if K.valuation(x, P) % 2:
        raise DomainError(f"{x} has odd valuation at {P.label()}")
    return 0 if K.unit_residue_symbol(x, P) == 1 else 1


def hilbert_symbol_q(a: Fraction, b: Fraction, p) -> int:
    """Hilbert symbol (a, b)_p over Q; p a prime or 'inf'."""
    a, b = Fraction(a), Fraction(b)
    if p in ("inf", 0, None):
        return -1 if (a < 0 and b < 0) else 1
    # work with integers: multiply by squares of denominators
    a = a.numerator * a.denominator
    b = b.numerator * b.denominator
    alpha, u = arith.valuation(a, p), a // p ** arith.valuation(a, p)
    beta, w = arith.valuation(b, p), b // p ** arith.valuation(b, p)
    if p != 2:
        s = (-1) ** (alpha * beta * ((p - 1) // 2) % 2)
        return s * arith.kronecker(u, p) ** beta * arith.kronecker(w, p) ** alpha
    eps = lambda z: ((z - 1) // 2) % 2  # noqa: E731
    om = lambda z: ((z * z - 1) // 8) % 2  # noqa: E731
    e = (eps(u) * eps(w) + alpha * om(w) + beta * om(u)) % 2
    return -1 if e else 1
