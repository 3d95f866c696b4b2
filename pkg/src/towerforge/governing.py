"""Square-class spaces V_K^S, V_{K,T}^S and Frobenius vectors.

V_K^S is the group of x in K^x whose ideal is a square times an ideal supported
on S; its image in K^x/(K^x)^2 is the Kummer dual of the Galois group of the
governing field K(sqrt V_K^S)/K.  For a prime q outside the support the
Frobenius acts on sqrt(x) by the quadratic residue symbol of x at q, so a
Frobenius vector is a bit vector of residue symbols.

Primes of S are primes of K.  A rational prime l in S stands for the pinned
prime above l (see quadfield.PRIME_CONVENTION); an inert l contributes (l).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence, Union

import numpy as np

from . import arith, gf2
from .abelian import _hnf_square, quotient_invariants
from .errors import DomainError, InternalInconsistency
from .quadfield import Prime, QuadField, Rationals, field_from_spec

Field = Union[Rationals, QuadField]

BASIS_ORDER = "torsion unit, fundamental unit, s-units by increasing l, class-lifts by height"


def as_primes(K: Field, S: Iterable) -> tuple[Prime, ...]:
    """Normalise a collection of rational primes / Prime objects to sorted primes of K."""
    out = set()
    for s in S:
        if isinstance(s, Prime):
            out.add(s)
            continue
        ell = int(s)
        if ell == 2 or not arith.is_prime(ell):
            raise DomainError(f"{ell} is not an odd prime")
        out.add(K.pinned_prime(ell))
    return tuple(sorted(out, key=lambda P: (P.ell, P.b if P.b is not None else -1)))


@dataclass(eq=False)
class SquareClass:
    field: Field
    rep: object
    tag: str
    ideal_shape: dict = field(default_factory=dict)

    def same_class(self, other: "SquareClass") -> bool:
        return self.field == other.field and self.field.is_square(self.rep * other.rep)

    def __eq__(self, other):
        if not isinstance(other, SquareClass):
            return NotImplemented
        return self.same_class(other)

    def __hash__(self):
        return hash(self.field)

    def __str__(self):
        return str(self.rep)

    def to_json(self):
        return {"repr": str(self.rep), "tag": self.tag, "ideal_shape": self.ideal_shape}


@dataclass
class GoverningDatum:
    field: Field
    S: tuple
    T: tuple
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def elements(self) -> list:
        return [b.rep for b in self.basis]

    def tags(self) -> list[str]:
        return [b.tag for b in self.basis]

    def to_json(self):
        return {"field": self.field.to_json(),
                "S": [P.to_json() for P in self.S], "T": [P.to_json() for P in self.T],
                "dim": self.dim, "basis": [b.to_json() for b in self.basis],
                "basis_order": BASIS_ORDER}


@dataclass(frozen=True)
class FrobeniusVector:
    coords: tuple
    prime: Prime

    def __len__(self):
        return len(self.coords)

    def to_json(self):
        return {"prime": self.prime.to_json(), "coords": list(self.coords)}


@dataclass
class LatticeTarget:
    """Frobenius target split along the two factors Gal(F5/F2) x Gal(F5/F3).

    local_conditions is the vector a = (a_l) over Sigma (all ones: inert
    everywhere); block_a is its image in the governing group, i.e. the required
    Frobenius bits on the basis of V_K^Sigma; block_z is the stability element
    as required bits on the unit square classes of the tower top.
    """

    local_conditions: tuple
    block_a: tuple
    block_z: tuple
    a_provenance: list
    z_provenance: list
    mode: str = "full"
    note: str = ""

    def to_json(self):
        return {"local_conditions": list(self.local_conditions), "block_a": list(self.block_a),
                "block_z": list(self.block_z), "a_basis": self.a_provenance,
                "z_basis": self.z_provenance, "mode": self.mode, "note": self.note}


# ------------------------------------------------------------------ helpers

def _relation_basis(logs: Sequence[Sequence[int]], invariants: Sequence[int]) -> list[list[int]]:
    """Basis of the lattice {n in Z^s : sum n_i log_i = 0 in prod Z/d}."""
    s, r = len(logs), len(invariants)
    if s == 0:
        return []
    rows = [[int(i == j) for j in range(s)] + list(logs[i]) for i in range(s)]
    rows += [[0] * s + [d if k == j else 0 for j in range(r)] for k, d in enumerate(invariants)]
    for c in range(s, s + r):
        while True:
            nz = [row for row in rows if row[c]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda row: abs(row[c]))
            rows = [row if (row is piv or not row[c])
                    else [x - (row[c] // piv[c]) * y for x, y in zip(row, piv)] for row in rows]
        # the surviving row with a nonzero entry cannot occur in a kernel vector
        rows = [row for row in rows if not row[c]]
    kernel = [row[:s] for row in rows if any(row[:s])]
    basis = _hnf_square(kernel, s)
    basis = [row if row[i] > 0 else [-x for x in row] for i, row in enumerate(basis)]
    # reduce above the diagonal so that exponents are nonnegative (integral generators)
    for j in range(s - 1, -1, -1):
        for i in range(j):
            q = basis[i][j] // basis[j][j]
            if q:
                basis[i] = [x - q * y for x, y in zip(basis[i], basis[j])]
    return basis


def _subgroup_exponents(G, target, gens) -> list[int]:
    orders = [G.element_order(g) for g in gens]
    for exps in product(*(range(o) for o in orders)):
        acc = G.identity
        for g, e in zip(gens, exps):
            acc = G.op(acc, G._pow(g, e))
        if acc == target:
            return list(exps)
    raise InternalInconsistency("class is not in the subgroup generated by the S-primes")


def _small_prime_in_class(K: QuadField, cls, limit: int = 10000):
    """A prime ideal of least norm in the given wide class, or None."""
    for ell in arith.iter_primes(2, limit):
        if K.splitting_type(ell) == "inert":
            continue
        P = K.pinned_prime(ell) if ell != 2 else K.dyadic_primes()[0]
        for Q in ([P, K.conjugate_prime(P)] if P.kind == "split" else [P]):
            if K.canonical(K.prime_form(Q)) == cls:
                return Q
    return None


def _product(K: Field, elems, exps):
    acc = K.elt(1)
    for x, e in zip(elems, exps):
        if e:
            acc = acc * x
    return acc


def check_independent(K: Field, elems: Sequence) -> bool:
    """No nonempty subproduct is a square (exhaustive)."""
    for exps in product((0, 1), repeat=len(elems)):
        if any(exps) and K.is_square(_product(K, elems, exps)):
            return False
    return True


def _support_shape(K: Field, x, primes) -> dict:
    return {P.label(): K.valuation(x, P) for P in primes if K.valuation(x, P)}


# ----------------------------------------------------------------- v_group

def v_group(K, S: Iterable = ()) -> GoverningDatum:
    """Ordered F2-basis of V_K^S / (K^x)^2."""
    K = field_from_spec(K)
    primes = as_primes(K, S)
    basis = [SquareClass(K, u, tag, {}) for tag, u in K.unit_generators()]
    n_units = len(basis)

    if isinstance(K, Rationals):
        for P in primes:
            basis.append(SquareClass(K, Fraction(P.ell), f"s_unit({P.ell})", {P.label(): 1}))
        _verify(K, basis, n_units + len(primes))
        return GoverningDatum(K, primes, (), basis)

    G = K.group()
    finite = [P for P in primes if P.kind != "inert"]
    classes = [K.canonical(K.prime_form(P)) for P in finite]
    sunits = []
    lattice = _relation_basis([G.log(c) for c in classes], G.invariants)
    for vec in lattice:
        J, r = K.ideal_from_exponents(finite, vec)
        g = K.principal_generator(J)
        if g is None:
            raise InternalInconsistency(f"relation {vec} gives a non-principal ideal")
        gamma = K.normalize_generator(g / r)
        lead = next(i for i, e in enumerate(vec) if e)
        sunits.append((finite[lead], gamma))
    for P in primes:
        if P.kind == "inert":
            sunits.append((P, K.elt(P.ell)))
    sunits.sort(key=lambda t: (t[0].ell, t[0].b if t[0].b is not None else -1))
    for P, gamma in sunits:
        basis.append(SquareClass(K, gamma, f"s_unit({P.ell})", _support_shape(K, gamma, primes)))

    lifts = _class_lifts(K, G, finite, classes, [b.rep for b in basis])
    for x in lifts:
        basis.append(SquareClass(K, x, "class_lift", _support_shape(K, x, primes)))
    cl_s_2 = len(lifts)
    _verify(K, basis, n_units + len(primes) + cl_s_2)
    return GoverningDatum(K, primes, (), basis)


def _class_lifts(K: QuadField, G, finite, classes, earlier) -> list:
    """x with (x) = a^2 * (S-part), one per basis class of Cl^S[2]."""
    inv, lifts, _ = quotient_invariants(G, classes)
    out = []
    for d, c in zip(inv, lifts):
        if d % 2:
            continue
        cls = G._pow(c, d // 2)
        P = _small_prime_in_class(K, cls)
        if P is not None:
            A = K.prime_ideal(P)
        else:
            A = K._normal_ideal(1, cls.a, cls.b)
        v = _subgroup_exponents(G, G.op(cls, cls), classes) if classes else []
        J, r = K.ideal_from_exponents(finite, [-e for e in v])
        g = K.principal_generator(K.ideal_mul(K.ideal_mul(A, A), J))
        if g is None:
            raise InternalInconsistency("square of a Cl^S[2] class lift is not principal")
        x = K.canonical_square_class(g / r)
        # smallest representative modulo the unit part of the basis
        units = [u for _, u in K.unit_generators()]
        cands = [K.normalize_generator(K.canonical_square_class(x * _product(K, units, e)))
                 for e in product((0, 1), repeat=len(units))]
        out.append(min(cands, key=lambda y: (y.height(), abs(y.a), abs(y.b), y.a, y.b)))
    out.sort(key=lambda y: (y.height(), abs(y.a), abs(y.b), y.a, y.b))
    return out


def _verify(K, basis, expected_dim):
    if len(basis) != expected_dim:
        raise InternalInconsistency(
            f"basis has {len(basis)} elements, exact sequence predicts {expected_dim}")
    if not check_independent(K, [b.rep for b in basis]):
        raise InternalInconsistency("governing basis is dependent modulo squares")


def dim_formula(K, S=()) -> dict:
    """The two sides of the exact sequence count for V_K^S."""
    K = field_from_spec(K)
    primes = as_primes(K, S)
    r1, r2 = K.signature
    e_s = r1 + r2 + len(primes)  # torsion + unit rank + s
    if isinstance(K, Rationals):
        cl = 0
    else:
        ells = [P.ell for P in primes]
        cl = K.s_class_group(ells).two_rank
    return {"units_mod_squares": e_s, "cl_s_2_rank": cl, "dim": e_s + cl}


# ------------------------------------------------------- local square classes

def local_class_bits(K: Field, x, P: Prime) -> tuple[int, int]:
    """Coordinates of x in K_P^x / squares: (valuation mod 2, unit residue bit)."""
    v = K.valuation(x, P)
    return v % 2, 0 if K.unit_residue_symbol(x, P) == 1 else 1


def v_group_restricted(K, S: Iterable = (), T: Iterable = ()) -> GoverningDatum:
    """Basis of V_{K,T}^S: elements of V_K^(S u T) that are local squares at every q in T."""
    K = field_from_spec(K)
    Sp, Tp = as_primes(K, S), as_primes(K, T)
    if set(Sp) & set(Tp):
        raise DomainError("S and T must be disjoint")
    big = v_group(K, tuple(Sp) + tuple(Tp))
    if not Tp:
        return GoverningDatum(K, Sp, (), big.basis)
    rows = []
    for b in big.basis:
        row = []
        for P in Tp:
            row.extend(local_class_bits(K, b.rep, P))
        rows.append(row)
    M = gf2.as_matrix(rows, 2 * len(Tp))
    kernel = gf2.left_nullspace(M)
    basis = []
    for vec in _reduced_rows(kernel):
        x = _product(K, big.elements, vec)
        tags = [b.tag for b, e in zip(big.basis, vec) if e]
        tag = tags[0] if len(tags) == 1 else "*".join(tags)
        if not isinstance(K, Rationals):
            x = K.canonical_square_class(x)
        else:
            x = Fraction(K.canonical_square_class(x))
        basis.append(SquareClass(K, x, tag, _support_shape(K, x, Sp)))
    return GoverningDatum(K, Sp, Tp, basis)


def _reduced_rows(m: np.ndarray) -> list:
    if m.shape[0] == 0:
        return []
    r, piv = gf2.rref(m)
    return [list(map(int, r[i])) for i in range(len(piv))]


# --------------------------------------------------------------- Frobenius

def frobenius_vector(q, G: GoverningDatum) -> FrobeniusVector:
    K = G.field
    P = q if isinstance(q, Prime) else K.pinned_prime(int(q))
    if P.ell == 2:
        raise DomainError("Frobenius vectors are defined at odd primes only")
    coords = []
    for b in G.basis:
        if K.valuation(b.rep, P) != 0:
            raise DomainError(f"{P.label()} divides the support of basis element {b.rep}")
        coords.append(0 if K.residue_symbol(b.rep, P) == 1 else 1)
    return FrobeniusVector(tuple(coords), P)


class FrobeniusEvaluator:
    """Fast Frobenius bits at rational primes for the scan loop.

    Each basis element is stored as (A + B sqrt m)/den with integers A, B, den.
    At an inert q the residue field is F_{q^2}, where x is a square iff its
    norm is a square in F_q; at a split q the pinned prime sends sqrt(D) to b.
    """

    def __init__(self, K: Field, elements: Sequence):
        self.K = K
        self.m = getattr(K, "m", None)
        self.data = []
        for x in elements:
            if isinstance(K, Rationals):
                x = Fraction(x)
                self.data.append((x.numerator * x.denominator, 0, 1))
            else:
                self.data.append(K.elt(x).xyd())

    def split_root(self, q: int) -> int:
        """sqrt(m) mod the pinned prime above a split q."""
        b = self.K.prime_root(q)
        if self.K.disc % 4 == 0:
            return b * pow(2, -1, q) % q
        return b % q

    def bits(self, q: int, kind: str | None = None) -> tuple | None:
        """Frobenius bits at the pinned prime above q, or None if q meets the support."""
        if self.m is None:
            out = []
            for A, _, _ in self.data:
                k = arith.kronecker(A, q)
                if k == 0:
                    return None
                out.append(0 if k == 1 else 1)
            return tuple(out)
        kind = kind or self.K.splitting_type(q)
        out = []
        if kind == "inert":
            for A, B, den in self.data:
                k = arith.kronecker(A * A - self.m * B * B, q)
                if k == 0 or den % q == 0:
                    return None
                out.append(0 if k == 1 else 1)
            return tuple(out)
        if kind != "split":
            return None
        s = self.split_root(q)
        for A, B, den in self.data:
            k = arith.kronecker((A + B * s) * den, q)
            if k == 0:
                return None
            out.append(0 if k == 1 else 1)
        return tuple(out)


# ---------------------------------------------------------- lattice target

def frobenius_target(G: GoverningDatum, sigma: Iterable, a: Sequence[int] | None = None) -> tuple:
    """Required Frobenius bits on G's basis for local conditions a over sigma.

    If N = K(sqrt y) is ramified only at q (and unramified at 2 and infinity),
    Hilbert reciprocity for (x, y) with x in V_K^Sigma gives
        chi_q(x) = sum over l in Sigma of a_l v_l(x)  (mod 2),
    a_l = 1 meaning l inert in N.
    """
    K = G.field
    sig = as_primes(K, sigma)
    a = [1] * len(sig) if a is None else list(a)
    bits = []
    for b in G.basis:
        bits.append(sum(al * K.valuation(b.rep, P) for al, P in zip(a, sig)) % 2)
    return tuple(bits)


def lattice_target(K, sigma: Iterable, tower_data=None, z_block=None) -> LatticeTarget:
    K = field_from_spec(K)
    G = v_group(K, sigma)
    sig = as_primes(K, sigma)
    block_a = frobenius_target(G, sig)
    a_prov = [b.to_json() for b in G.basis]
    if z_block is None and tower_data is not None:
        z_block = getattr(tower_data, "z", None)
    if tower_data is None and z_block is None:
        if isinstance(K, Rationals):
            return LatticeTarget(tuple([1] * len(sig)), block_a, (), a_prov, [], "full",
                                 "trivial tower: no stability block")
        return LatticeTarget(tuple([1] * len(sig)), block_a, (), a_prov, [], "local-only",
                             "stability block unavailable; running in local-conditions-only mode")
    z_prov = list(getattr(tower_data, "unit_labels", []))
    return LatticeTarget(tuple([1] * len(sig)), block_a, tuple(int(z) for z in z_block),
                         a_prov, z_prov, "full", "")
