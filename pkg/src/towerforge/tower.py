"""Data on the 2-class field tower of the base field.

Only towers of length at most one whose top is biquadratic are modelled
explicitly: for K quadratic with Cl_2(K) = Z/2 the top is B = K(sqrt x) for the
unique unramified quadratic x, and h(B) odd (Kuroda) certifies that the tower
stops there.  The unit module E_B/E_B^2 then carries the action of Gal(B/K),
and the stability element z lives in its dual (the Kummer group of
B(sqrt E_B)/B).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import arith
from .biquad import (BiquadField, _mq_residue, fq2_is_square, fq2_sqrt_of, kuroda_details,
                     rational_descent, relative_extension, unit_square_basis, unramified_test)
from .errors import DomainError, HypothesisFailure, InternalInconsistency
from .gmodule import (ABELIANIZATION, F2GModule, TowerProfile, a_invariant, canonical_group_name,
                      decompose, stability_target)
from .governing import v_group, _product
from .quadfield import Prime, QuadField, Rationals, field_from_spec


@dataclass
class TowerData:
    K: object
    group: str
    cl2: list
    B: BiquadField | None = None
    class_field_gen: object = None
    unit_labels: list = field(default_factory=list)
    units: list = field(default_factory=list)
    module: F2GModule | None = None
    lam: int | None = None
    z: tuple | None = None
    free_basis: list = field(default_factory=list)
    kuroda: dict | None = None
    note: str = ""

    @property
    def available(self) -> bool:
        return self.z is not None

    def to_json(self):
        out = {"group": self.group, "cl2": self.cl2, "lambda": self.lam,
               "note": self.note}
        if self.B is not None:
            out.update({"top_field": self.B.label(), "top_discs": list(self.B.discs),
                        "class_field_generator": str(self.class_field_gen),
                        "unit_basis": self.unit_labels,
                        "z": list(self.z) if self.z is not None else None,
                        "free_basis": [list(map(int, e)) for e in self.free_basis],
                        "action": self.module.to_json() if self.module else None,
                        "kuroda_h_top": self.kuroda["h"] if self.kuroda else None})
        return out

    # ------------------------------------------------------------ residues

    def unit_bits(self, q: int, P: Prime) -> list[tuple] | None:
        """Frobenius bit vectors on the unit basis at the primes of B above P.

        Each admissible choice of square roots of the radicands in F_{q^2}
        compatible with the pinned embedding of K is one prime of B above P.
        """
        if self.B is None:
            return None
        L = self.B.mq()
        F = arith.Fq2(q)
        if any(a % q == 0 for a in L.rads):
            return None
        base = [fq2_sqrt_of(a, F) for a in L.rads]
        in_fq = all(r[1] == 0 for r in base)
        sm = L.sqrt_of_int(self.K.m)
        mask = next(i for i, c in enumerate(sm) if c)
        coef = sm[mask]
        want = None
        if P.kind == "split":
            b = self.K.prime_root(q)
            s = b * pow(2, -1, q) % q if self.K.disc % 4 == 0 else b % q
            want = (s, 0)
        out = set()
        for signs in product((1, -1), repeat=L.k):
            roots = [(sg * r[0] % q, sg * r[1] % q) for sg, r in zip(signs, base)]
            if want is not None:
                img = (coef.numerator * pow(coef.denominator, -1, q) % q, 0)
                for i in range(L.k):
                    if mask >> i & 1:
                        img = F.mul(img, roots[i])
                if img != want:
                    continue
            bits = []
            for x in self.units:
                v = _mq_residue(L, x, roots, F)
                if v is None or v == (0, 0):
                    return None
                bits.append(0 if fq2_is_square(v, F, in_fq) == 1 else 1)
            out.add(tuple(bits))
        return sorted(out)


def _galois_sign_mask(L, m: int) -> list[int]:
    """Signs of the generator of Gal(B/K), K = Q(sqrt m), on the MQ basis masks."""
    s = [1 if arith.is_square(abs(a * m)) and (a * m) > 0 else -1 for a in L.rads]
    out = []
    for mask in range(L.n):
        sg = 1
        for i in range(L.k):
            if mask >> i & 1:
                sg *= s[i]
        out.append(sg)
    return out


def _square_class_coords(L, basis, y) -> list[int]:
    for exps in product((0, 1), repeat=len(basis)):
        acc = y
        for e, x in zip(exps, basis):
            if e:
                acc = L.mul(acc, x)
        if L.is_square(acc):
            return list(exps)
    raise InternalInconsistency("unit is not in the span of the unit basis modulo squares")


def unramified_quadratic_gens(K: QuadField) -> list:
    """Square classes x in V_K with K(sqrt x)/K unramified everywhere (nontrivial)."""
    G = v_group(K)
    out = []
    for exps in product((0, 1), repeat=G.dim):
        if not any(exps):
            continue
        x = K.canonical_square_class(_product(K, G.elements, exps))
        ok, _ = unramified_test(relative_extension(K, x))
        if ok:
            out.append(x)
    return out


def tower_data(K, group: str = "C1") -> TowerData:
    K = field_from_spec(K)
    group = canonical_group_name(group)
    if isinstance(K, Rationals):
        if group != "C1":
            raise HypothesisFailure(f"Q has trivial 2-class field tower, not {group}")
        return TowerData(K, group, [], lam=1, z=(), note="trivial tower")
    cl2 = K.class_group().two_part
    want = ABELIANIZATION[group]
    if sorted(cl2) != sorted(want):
        raise HypothesisFailure(
            f"Cl_2({K.label()}) has invariants {cl2}, but a tower with group {group} "
            f"needs {want}")
    r1, r2 = K.signature
    if group == "C1":
        dim = len(K.unit_generators())
        return TowerData(K, group, cl2, lam=dim, z=(), note="trivial tower")
    if group != "C2":
        return TowerData(K, group, cl2,
                         note="unit module of the tower top is outside the biquadratic scope")

    xs = unramified_quadratic_gens(K)
    if len(xs) != 1:
        raise InternalInconsistency(f"expected one unramified quadratic extension, found {len(xs)}")
    x = xs[0]
    r = rational_descent(K, x)
    if r is None:
        return TowerData(K, group, cl2, class_field_gen=x,
                         note="class field does not descend to a biquadratic field")
    B = BiquadField.from_radicands(K.m, r)
    kd = kuroda_details(B)
    if kd["h"] % 2 == 0:
        raise HypothesisFailure(
            f"h({B.label()}) = {kd['h']} is even: the 2-tower of {K.label()} is longer than Z/2")
    L = B.mq()
    basis = unit_square_basis(B)
    labels = [lab for lab, _ in basis]
    units = [u for _, u in basis]
    signs = _galois_sign_mask(L, K.m)
    cols = []
    for u in units:
        gu = tuple(c * s for c, s in zip(u, signs))
        cols.append(_square_class_coords(L, units, gu))
    A = np.array(cols, dtype=np.uint8).T
    M = F2GModule("C2", [A])
    Mdual = M.dual()
    lam, _ = decompose(Mdual)
    A_K = a_invariant(TowerProfile.for_group("C2", (r1, r2)))
    if lam < A_K:
        raise InternalInconsistency(f"lambda = {lam} < A_K = {A_K}")
    if lam < 1:
        return TowerData(K, group, cl2, B, x, labels, units, Mdual, lam, None, [], kd,
                         note=f"lambda = {lam} < h1 = 1: no stability element")
    z, es = stability_target(Mdual, lam, 1)
    return TowerData(K, group, cl2, B, x, labels, units, Mdual, lam,
                     tuple(int(v) for v in z), es, kd)


def infer_group(K) -> str:
    """Tower group when Cl_2 alone determines it (trivial or Z/2)."""
    K = field_from_spec(K)
    if isinstance(K, Rationals):
        return "C1"
    cl2 = K.class_group().two_part
    if not cl2:
        return "C1"
    if cl2 == [2]:
        return "C2"
    raise DomainError(f"Cl_2({K.label()}) = {cl2}: give the tower group explicitly")
