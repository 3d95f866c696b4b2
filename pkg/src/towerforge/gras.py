"""Z/2-extensions with prescribed tame ramification and splitting.

For p = 2 the coefficients a_i of Gras's criterion are forced to 1: a
Z/2-extension of K ramified exactly at T and totally decomposed at S exists iff
the Frobenius vectors of the primes of T in the governing group of (K, S) add
up to zero.  Ramification at 2 and at the real places is excluded throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

from . import arith
from .biquad import RelativeQuadExt, rational_descent, relative_extension, unramified_test
from .errors import DomainError, InternalInconsistency, SearchFailure
from .governing import (FrobeniusEvaluator, GoverningDatum, _product, as_primes,
                        frobenius_vector, v_group)
from .quadfield import Prime, QuadField, Rationals, field_from_spec

FILTERS = ("any", "inert", "degree1")


def _xor(vectors) -> tuple:
    vectors = list(vectors)
    if not vectors:
        return ()
    return tuple(sum(c) % 2 for c in zip(*vectors))


def gras_details(K, T: Iterable, S: Iterable = ()) -> dict:
    K = field_from_spec(K)
    Tp, Sp = as_primes(K, T), as_primes(K, S)
    if set(Tp) & set(Sp):
        raise DomainError("T and S must be disjoint")
    if not Tp:
        raise DomainError("T must be nonempty")
    G = v_group(K, Sp)
    vecs = {P.label(): frobenius_vector(P, G).coords for P in Tp}
    total = _xor(vecs.values())
    exists = not any(total)
    # subsets whose Frobenius vectors also cancel give extensions ramified at fewer primes
    cancelling = []
    for k in range(1, len(Tp)):
        for X in combinations(Tp, k):
            if not any(_xor(vecs[P.label()] for P in X)):
                cancelling.append([P.label() for P in X])
    return {"exists": exists, "frobenius": vecs, "sum": list(total),
            "cancelling_proper_subsets": cancelling, "minimal": exists and not cancelling,
            "governing_dim": G.dim}


def gras_exists(K, T: Iterable, S: Iterable = ()) -> bool:
    """Is there a Z/2-extension ramified exactly at T and totally decomposed at S?"""
    return gras_details(K, T, S)["exists"]


# ----------------------------------------------------------- construction

def _ramification_generator(K: QuadField, P: Prime):
    """gamma with (gamma) = a^2 * P, or None when the class of P is not a square."""
    if P.kind == "inert":
        return K.elt(P.ell)
    G = K.group()
    cP = K.canonical(K.prime_form(P))
    target = None
    for c in G.table:
        if G.op(G.op(c, c), cP) == G.identity:
            target = c
            break
    if target is None:
        return None
    A = K._normal_ideal(1, target.a, target.b)
    J = K.ideal_mul(K.ideal_mul(A, A), K.prime_ideal(P))
    g = K.principal_generator(J)
    if g is None:
        raise InternalInconsistency("a^2 P of trivial class has no generator")
    return g


def _local_ok(K, y, inert: Sequence[Prime], split: Sequence[Prime]) -> bool:
    for P in inert:
        if K.unit_residue_symbol(y, P) != -1 or K.valuation(y, P) % 2:
            return False
    for P in split:
        if K.unit_residue_symbol(y, P) != 1 or K.valuation(y, P) % 2:
            return False
    return True


def build_extension(K, q, inert: Iterable = (), split: Iterable = ()) -> RelativeQuadExt:
    """K(sqrt y) ramified exactly at the prime q (unramified at 2 and infinity),
    inert at the primes in `inert` and split at those in `split`.

    Candidates are y = gamma * w with (gamma) = a^2 q and w running over
    V_K / squares; among admissible ones a generator descending to Q is
    preferred, then the smallest height.
    """
    K = field_from_spec(K)
    P = q if isinstance(q, Prime) else K.pinned_prime(int(q))
    inert_p, split_p = as_primes(K, inert), as_primes(K, split)
    if isinstance(K, Rationals):
        ell = P.ell
        # closed form q*; for q = 3 mod 4 this is imaginary, which the
        # Q-level construction accepts (only finite ramification is constrained)
        y = Fraction(ell if ell % 4 == 1 else -ell)
        if not _local_ok(K, y, inert_p, split_p):
            raise DomainError(f"Q(sqrt({y})) does not meet the requested local conditions")
        return relative_extension(K, y)
    gamma = _ramification_generator(K, P)
    if gamma is None:
        raise DomainError(f"the class of {P.label()} is not a square; no Z/2-extension "
                          "of K is ramified exactly there")
    V = v_group(K).elements
    cands = [K.canonical_square_class(gamma * _product(K, V, exps))
             for exps in product((0, 1), repeat=len(V))]
    good = []
    for y in cands:
        if not _local_ok(K, y, inert_p, split_p):
            continue
        E = relative_extension(K, y)
        ok, rep = unramified_test(E)
        ram = [k for k, v in rep.items() if v == "ramified"]
        if ram == [P.label()]:
            good.append(E)
    if not good:
        raise InternalInconsistency(
            f"no Kummer generator ramified exactly at {P.label()} meets the local conditions")

    def key(E):
        y = E.kummer_gen
        desc = rational_descent(K, y)
        return (desc is None, y.height(), abs(y.a), abs(y.b), y.a, y.b)

    best = min(good, key=key)
    r = rational_descent(K, best.kummer_gen)
    if r is not None:
        best = relative_extension(K, K.elt(r))
    return best


def inertia_check(E: RelativeQuadExt, S: Iterable) -> dict:
    """For each prime of the base above l in S: 'inert' or 'split' (or 'ramified')."""
    k = E.base
    out = {}
    for s in S:
        primes = [s] if isinstance(s, Prime) else k.primes_above(int(s))
        for P in primes:
            if k.valuation(E.kummer_gen, P) % 2:
                out[P.label()] = "ramified"
            else:
                out[P.label()] = "inert" if k.unit_residue_symbol(E.kummer_gen, P) == -1 else "split"
    return out


# --------------------------------------------------------------- search

@dataclass
class SearchResult:
    q: int
    prime: Prime
    frobenius: tuple
    z_bits: tuple
    prime_filter: str
    stats: dict = field(default_factory=dict)

    def to_json(self):
        return {"q": self.q, "prime": self.prime.to_json(), "frobenius": list(self.frobenius),
                "z_bits": list(self.z_bits), "filter": self.prime_filter, "stats": self.stats}


def _admissible(K, q: int, prime_filter: str) -> str | None:
    """Splitting kind of q if it passes the filter."""
    if isinstance(K, Rationals):
        return "rational"
    kind = K.splitting_type(q)
    if kind == "ramified":
        return None
    if prime_filter == "inert" and kind != "inert":
        return None
    if prime_filter == "degree1" and kind != "split":
        return None
    return kind


def _scan_chunk(args):
    K, elements, block_a, block_z, tower, lo, hi, prime_filter, excluded = args
    ev = FrobeniusEvaluator(K, elements)
    tested = matched_a = 0
    for q in arith.primes_between(max(lo, 3), hi):
        if q in excluded or (K.disc % q == 0 if not isinstance(K, Rationals) else False):
            continue
        kind = _admissible(K, q, prime_filter)
        if kind is None:
            continue
        bits = ev.bits(q, None if kind == "rational" else kind)
        if bits is None:
            continue
        tested += 1
        if bits != block_a:
            continue
        matched_a += 1
        zb = ()
        if block_z:
            P = K.pinned_prime(q)
            options = tower.unit_bits(q, P)
            if not options or tuple(block_z) not in options:
                continue
            zb = tuple(block_z)
        return q, bits, zb, tested, matched_a
    return None, None, None, tested, matched_a


def chebotarev_search(K, datum: GoverningDatum, block_a: Sequence[int], bound: int,
                      prime_filter: str = "any", block_z: Sequence[int] = (), tower=None,
                      exclude: Iterable[int] = (), workers: int = 1,
                      chunk: int = 1 << 15) -> SearchResult:
    """Smallest admissible rational prime q whose pinned prime has the target Frobenius.

    Primes dividing 2D, primes in `exclude` and primes meeting the support of
    the basis are skipped.  Chunks are scanned in increasing order; with
    several workers a batch of chunks runs in parallel and the minimum hit of
    the first successful batch is returned, so the answer does not depend on
    the number of workers.
    """
    K = field_from_spec(K)
    if prime_filter not in FILTERS:
        raise DomainError(f"unknown prime filter {prime_filter!r}")
    if len(block_a) != datum.dim:
        raise DomainError("target length does not match the governing datum")
    if block_z and tower is None:
        raise DomainError("a stability block needs tower data")
    block_a = tuple(int(b) for b in block_a)
    excluded = frozenset(int(e) for e in exclude) | {2}
    elements = datum.elements
    tested = matched = 0
    ranges = [(lo, min(lo + chunk, bound + 1)) for lo in range(3, bound + 1, chunk)]
    batch = max(1, workers)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(0, len(ranges), batch):
            args = [(K, elements, block_a, tuple(block_z), tower, lo, hi, prime_filter, excluded)
                    for lo, hi in ranges[i:i + batch]]
            results = list(pool.map(_scan_chunk, args)) if pool else [_scan_chunk(a) for a in args]
            hit = None
            for q, bits, zb, t, m in results:
                if hit is None:
                    # chunks after the first hit of the batch do not count towards stats
                    tested += t
                    matched += m
                if q is not None and hit is None:
                    hit = (q, bits, zb)
            if hit is not None:
                q, bits, zb = hit
                P = K.pinned_prime(q) if not isinstance(K, Rationals) else Prime(1, q, "rational")
                audit = frobenius_vector(P, datum).coords
                if audit != bits:
                    raise InternalInconsistency(f"fast Frobenius bits {bits} != audit {audit} at {q}")
                stats = _stats(tested, matched, datum.dim, bool(block_z))
                return SearchResult(q, P, audit, zb, prime_filter, stats)
    finally:
        if pool:
            pool.shutdown()
    stats = _stats(tested, matched, datum.dim, bool(block_z))
    raise SearchFailure(
        f"no prime up to {bound} has the target Frobenius under filter {prime_filter!r} "
        f"({tested} tested, {matched} matched the local block)", stats)


def _stats(tested: int, matched: int, dim: int, has_z: bool) -> dict:
    return {"tested": tested, "matched_local_block": matched,
            "local_block_density": matched / tested if tested else None,
            "expected_density": 2.0 ** -dim, "stability_block": has_z}


def hit_rate(K, datum: GoverningDatum, target: Sequence[int], bound: int) -> dict:
    """Empirical frequency of the target among primes up to bound (support excluded)."""
    K = field_from_spec(K)
    ev = FrobeniusEvaluator(K, datum.elements)
    target = tuple(int(t) for t in target)
    n = hits = 0
    for q in arith.primes_between(3, bound):
        kind = _admissible(K, q, "any")
        if kind is None:
            continue
        bits = ev.bits(q, None if kind == "rational" else kind)
        if bits is None:
            continue
        n += 1
        hits += bits == target
    p = 2.0 ** -datum.dim
    se = math.sqrt(p * (1 - p) / n) if n else float("nan")
    rate = hits / n if n else float("nan")
    return {"tested": n, "hits": hits, "rate": rate, "expected": p, "std_error": se,
            "z_score": (rate - p) / se if n else float("nan")}
