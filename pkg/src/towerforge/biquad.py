"""Verification arithmetic for biquadratic fields and relative quadratic extensions.

Classical formulas used here (external input, pinned to one convention):

* Kuroda: h(B) = q(B) h1 h2 h3 / 4 if B is totally real, / 2 if B is totally
  imaginary, where q(B) = [E_B : E1 E2 E3] and E_i contains the roots of unity
  of the i-th quadratic subfield.
* Chevalley: #Am(L/k) = h(k) 2^(t-1) / [E_k : E_k ∩ N L^x], t counting finite
  and infinite places of k ramified in L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Union

from . import arith, gf2
from .errors import DomainError
from .multiquad import MQField
from .quadfield import Prime, QuadField, Rationals, fundamental_discriminant, hilbert_symbol_q

KURODA_CONVENTION = "h(B) = q h1 h2 h3 / 4 (real B) or / 2 (imaginary B), q = [E_B : E1E2E3]"
CHEVALLEY_CONVENTION = "#Am = h(k) 2^(t-1) / [E_k : E_k ∩ N], t = ramified places incl. infinite"

Base = Union[Rationals, QuadField]


def _core(d: int) -> int:
    return arith.squarefree_part(d)[0]


@dataclass(frozen=True)
class BiquadField:
    d1: int
    d2: int
    d3: int

    def __post_init__(self):
        ds = (self.d1, self.d2, self.d3)
        if len(set(ds)) != 3:
            raise DomainError(f"subfield discriminants {ds} are not distinct")
        want = fundamental_discriminant(_core(self.d1) * _core(self.d2)).disc
        if want != self.d3:
            raise DomainError(f"d3 must be {want} for d1={self.d1}, d2={self.d2}")

    @classmethod
    def from_radicands(cls, m1: int, m2: int) -> "BiquadField":
        d1 = fundamental_discriminant(m1).disc
        d2 = fundamental_discriminant(m2).disc
        d3 = fundamental_discriminant(_core(m1) * _core(m2)).disc
        return cls(*sorted((d1, d2, d3), key=lambda d: (abs(d), d)))

    @property
    def discs(self):
        return (self.d1, self.d2, self.d3)

    @property
    def subfields(self) -> list[QuadField]:
        return [QuadField(d) for d in self.discs]

    @property
    def radicands(self) -> list[int]:
        return [K.m for K in self.subfields]

    @property
    def is_real(self) -> bool:
        return all(d > 0 for d in self.discs)

    def mq(self) -> MQField:
        return MQField(self.radicands[:2])

    def label(self) -> str:
        m = self.radicands
        return f"Q(√{m[0]}, √{m[1]})"

    def to_json(self):
        return {"field": self.label(), "discs": list(self.discs)}


def _unit_generators_mod_squares(B: BiquadField):
    """Generators of E1E2E3 modulo (E1E2E3)^2, as (label, subfield index, element)."""
    gens = []
    # W1W2W3 is cyclic, so modulo squares it is Z/2; i generates it when Q(i) is a
    # subfield, otherwise -1 does (zeta_6 = -zeta_3^2)
    if -4 in B.discs:
        i = B.discs.index(-4)
        gens.append(("i", i, QuadField(-4).torsion_generator()))
    else:
        gens.append(("-1", 0, Fraction(-1)))
    for i, K in enumerate(B.subfields):
        if K.is_real:
            gens.append((f"eps({K.label()})", i, K.fundamental_unit().element))
    return gens


def _kubota_data(B: BiquadField):
    """(count, [(label, element)]) for E1E2E3 and the square roots found in B."""
    L = B.mq()
    gens = _unit_generators_mod_squares(B)
    emb = [(g[0], L.embed(g[2])) for g in gens]
    roots = []
    count = 0
    for exps in product((0, 1), repeat=len(gens)):
        x = L.one()
        for e, (_, y) in zip(exps, emb):
            if e:
                x = L.mul(x, y)
        r = L.sqrt(x)
        if r is not None:
            count += 1
            if any(exps):
                label = "sqrt(" + "*".join(g[0] for g, e in zip(gens, exps) if e) + ")"
                roots.append((label, r))
    if count not in (1, 2, 4, 8):
        raise AssertionError(f"unit index {count} is not a power of 2 <= 8")
    return count, emb + roots


def kubota_unit_index(B: BiquadField):
    """(q, generators): q = [E_B : E1E2E3] by exact square-root tests.

    The generators are those of E1E2E3 together with square roots of the
    products that are squares in B.
    """
    count, gens = _kubota_data(B)
    L = B.mq()
    return count, [{"label": lab, "element": L.to_text(e)} for lab, e in gens]


def _mq_residue(L: MQField, x, roots, F: arith.Fq2):
    """Image in F_{q^2} of x, given images of sqrt(radicand_i)."""
    q = F.q
    acc = (0, 0)
    for mask, c in enumerate(x):
        if not c:
            continue
        if c.denominator % q == 0:
            return None
        term = (c.numerator * pow(c.denominator, -1, q) % q, 0)
        for i in range(L.k):
            if mask >> i & 1:
                term = F.mul(term, roots[i])
        acc = ((acc[0] + term[0]) % q, (acc[1] + term[1]) % q)
    return acc


def fq2_sqrt_of(a: int, F: arith.Fq2):
    """A square root in F_q[t]/(t^2 - r) of the integer a (q not dividing a)."""
    q = F.q
    a %= q
    if arith.kronecker(a, q) == 1:
        return (arith.sqrt_mod(a, q), 0)
    return (0, arith.sqrt_mod(a * pow(F.r, -1, q) % q, q))


def fq2_is_square(x, F: arith.Fq2, in_fq: bool) -> int:
    """Quadratic character of a nonzero x in F_q (in_fq) or in F_{q^2}."""
    q = F.q
    if in_fq:
        return arith.kronecker(x[0], q)
    return arith.kronecker(F.norm(x), q)


def unit_square_basis(B: BiquadField, max_prime: int = 20000):
    """F2-basis of E_B / E_B^2 as [(label, element)], with character certificates.

    Independence is certified by quadratic characters at primes of B that split
    completely; the expected dimension is rank + 1.
    """
    L = B.mq()
    _, gens = _kubota_data(B)
    expected = (3 if B.is_real else 1) + 1
    rows = {i: [] for i in range(len(gens))}
    basis_idx: list[int] = []
    disc = abs(B.d1 * B.d2 * B.d3)
    for p in arith.iter_primes(3, max_prime):
        if disc % p == 0 or any(arith.kronecker(a, p) != 1 for a in L.rads):
            continue
        F = arith.Fq2(p)
        base_roots = [fq2_sqrt_of(a, F) for a in L.rads]
        for signs in product((1, -1), repeat=L.k):
            roots = [(s * r[0] % p, s * r[1] % p) for s, r in zip(signs, base_roots)]
            for i, (_, x) in enumerate(gens):
                v = _mq_residue(L, x, roots, F)
                rows[i].append(0 if v is None or fq2_is_square(v, F, True) == 1 else 1)
        mat = [rows[i] for i in range(len(gens))]
        if gf2.rank(mat) == expected:
            # greedy independent subset in generator order
            basis_idx = []
            for i in range(len(gens)):
                if gf2.rank([rows[j] for j in basis_idx + [i]]) == len(basis_idx) + 1:
                    basis_idx.append(i)
            break
    if len(basis_idx) != expected:
        raise AssertionError(f"could not certify a basis of E_B/E_B^2 for {B.label()}")
    return [gens[i] for i in basis_idx]


def kuroda_class_number(B: BiquadField) -> int:
    return kuroda_details(B)["h"]


def kuroda_details(B: BiquadField) -> dict:
    q, gens = kubota_unit_index(B)
    hs = [K.class_number() for K in B.subfields]
    # a non-real biquadratic field has exactly one real quadratic subfield
    v = 2 if B.is_real else 1
    num = q * math.prod(hs)
    if num % (1 << v):
        raise AssertionError(f"Kuroda formula gives a non-integer for {B.label()}")
    return {"field": B.label(), "discs": list(B.discs), "q_index": q, "subfield_h": hs,
            "h": num >> v, "real": B.is_real, "convention": KURODA_CONVENTION,
            "unit_generators": gens}


# ----------------------------------------------------- relative extensions


@dataclass
class RelativeQuadExt:
    """base(sqrt kummer_gen) over Q or a quadratic field."""

    base: Base
    kummer_gen: object
    ramified_primes: list = field(default_factory=list)
    infinite_ramification: bool = False
    dyadic_report: dict = field(default_factory=dict)

    def label(self) -> str:
        return f"{self.base.label()}(√({self.kummer_gen}))"

    def to_json(self):
        return {"base": self.base.to_json(), "kummer_gen": str(self.kummer_gen),
                "ramified_primes": [P.to_json() for P in self.ramified_primes],
                "ramified_dyadic": [k for k, ok in self.dyadic_report.items() if not ok],
                "infinite_ramification": self.infinite_ramification}

    def as_biquad(self) -> BiquadField | None:
        """The biquadratic field when base is quadratic and the generator descends to Q."""
        if not isinstance(self.base, QuadField):
            return None
        r = rational_descent(self.base, self.kummer_gen)
        if r is None:
            return None
        return BiquadField.from_radicands(self.base.m, r)


def _rational_core(r) -> int:
    r = Fraction(r)
    return arith.squarefree_part(r.numerator * r.denominator)[0]


def rational_descent(K: QuadField, x) -> int | None:
    """Squarefree integer r with x = r * y^2 in K, or None.

    If x = r y^2 with y = s + t sqrt m and n = r N(y), then x + n = 2 r s y, so
    x / (x + n)^2 = 1 / (4 r s^2) is rational and in the class of r.
    """
    x = K.elt(x)
    if x.b == 0:
        r = _rational_core(x.a)
        return min(r, _rational_core(r * K.m), key=lambda z: (abs(z), z))
    n = arith.rational_sqrt(x.norm())
    if n is None:
        return None
    for sgn in (n, -n):
        w = x + sgn
        if w.is_zero():
            continue
        c = x / (w * w)
        if c.b == 0 and K.is_square(x / c.a):
            r = _rational_core(c.a)
            # r and r*m give the same class in K
            return min(r, _rational_core(r * K.m), key=lambda z: (abs(z), z))
    return None


def relative_extension(base: Base, x) -> RelativeQuadExt:
    """base(sqrt x) with its ramification data."""
    x = base.elt(x)
    if base.is_square(x):
        raise DomainError(f"{x} is a square in {base.label()}")
    primes = [P for P in base.odd_support(x) if base.valuation(x, P) % 2]
    dy = base.dyadic_unramified(x)
    inf = any(s < 0 for s in base.real_signs(x))
    return RelativeQuadExt(base, x, primes, inf, dy)


def unramified_test(E: RelativeQuadExt) -> tuple[bool, dict]:
    report = {}
    for P in E.ramified_primes:
        report[P.label()] = "ramified"
    for lab, ok in E.dyadic_report.items():
        report[lab] = "unramified" if ok else "ramified"
    signs = E.base.real_signs(E.kummer_gen)
    for i, s in enumerate(signs):
        report[f"inf{i}"] = "ramified" if s < 0 else "unramified"
    ok = all(v == "unramified" for v in report.values())
    return ok, report


def ramified_places(E: RelativeQuadExt) -> int:
    t = len(E.ramified_primes)
    t += sum(1 for ok in E.dyadic_report.values() if not ok)
    t += sum(1 for s in E.base.real_signs(E.kummer_gen) if s < 0)
    return t


def _local_unit_norm_symbols(E: RelativeQuadExt, u) -> dict:
    """Hilbert symbols (u, x)_v at every place v of the base (u a global unit)."""
    k, x = E.base, E.kummer_gen
    out = {}
    if isinstance(k, Rationals):
        places = [P.ell for P in k.odd_support(x)] + [2, "inf"]
        for p in places:
            out[str(p)] = hilbert_symbol_q(u, x, p)
        return out
    for P in k.odd_support(x):
        out[P.label()] = k.hilbert_symbol_unit(u, x, P)
    for i, (su, sx) in enumerate(zip(k.real_signs(u), k.real_signs(x))):
        out[f"inf{i}"] = -1 if (su < 0 and sx < 0) else 1
    dyadic = k.dyadic_primes()
    unknown = []
    for P in dyadic:
        lab = P.label()
        if E.dyadic_report.get(lab, True):
            out[lab] = 1  # units are norms from unramified local extensions
        elif P.kind == "split":
            out[lab] = _split_dyadic_symbol(k, u, x, P)
        else:
            unknown.append(lab)
    if len(unknown) == 1:
        # product formula
        out[unknown[0]] = math.prod(out.values())
    elif unknown:
        raise DomainError("dyadic Hilbert symbols at several non-split primes are unsupported")
    return out


def _split_dyadic_symbol(k: QuadField, u, x, P: Prime) -> int:
    """(u, x) at a split dyadic prime, computed in Q_2 via the embedding sqrt D = b mod 4."""
    prec = 64
    mod = 1 << prec
    root = arith.two_adic_sqrt(k.disc % mod, prec)
    if (root - P.b) % 4:
        root = (-root) % mod

    def image(y):
        a, beta = k.dcoords(y)
        den = math.lcm(a.denominator, beta.denominator)
        e = arith.valuation(den, 2)
        num = (int(a * den) + int(beta * den) * root) * pow(den >> e, -1, mod) % mod
        return Fraction(num, 1 << e)

    ui, xi = image(k.elt(u)), image(k.elt(x))
    # only the class modulo 8 * 2^v matters; truncated images are exact enough
    return hilbert_symbol_q(_trim(ui, prec), _trim(xi, prec), 2)


def _trim(z: Fraction, prec: int) -> Fraction:
    num, den = z.numerator, z.denominator
    v = arith.valuation(num, 2) if num else prec
    if v > prec - 8:
        raise DomainError("insufficient 2-adic precision")
    unit = (num >> v) % 8
    return Fraction(unit * (1 << v), den)


def chevalley_ambiguous(E: RelativeQuadExt) -> int:
    return chevalley_details(E)["ambiguous"]


def chevalley_details(E: RelativeQuadExt) -> dict:
    k = E.base
    if not isinstance(k, (Rationals, QuadField)):
        raise DomainError("unsupported base field")
    t = ramified_places(E)
    units = [u for _, u in k.unit_generators()]
    # F2-matrix of local symbols; the index [E : E ∩ N] is 2^rank
    rows = [_local_unit_norm_symbols(E, u) for u in units]
    keys = sorted({key for r in rows for key in r})
    mat = [[0 if r.get(key, 1) == 1 else 1 for key in keys] for r in rows]
    rank = gf2.rank(mat) if mat and keys else 0
    index = 1 << rank
    h = k.class_number()
    am = Fraction(h * 2 ** t, 2 * index)
    if am.denominator != 1:
        raise AssertionError("non-integral ambiguous class number")
    return {"ambiguous": int(am), "t": t, "unit_norm_index": index, "h_base": h,
            "convention": CHEVALLEY_CONVENTION}
