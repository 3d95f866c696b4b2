"""Split elimination: make the primes of S totally split in the 2-tower.

One step chooses a tame prime q whose Frobenius hits the lattice target, builds
N = K(sqrt y) ramified only at q and inert at every prime of Sigma, and records
the evidence that the 2-tower of N is N L_2(K).  Each step halves the residue
degree of the tracked primes in the tower, so at most e_G steps are needed.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import arith, gf2
from .biquad import (chevalley_details, kuroda_details, relative_extension,
                     unramified_test)
from .errors import (DomainError, HypothesisFailure, InternalInconsistency, PreconditionError,
                     SearchFailure, TowerforgeError)
from .gmodule import GROUP_TABLE, TowerProfile, a_invariant, canonical_group_name
from .governing import (_product, as_primes, frobenius_vector,
                        lattice_target, local_class_bits, v_group, v_group_restricted)
from .gras import build_extension, chebotarev_search, gras_exists, inertia_check
from .quadfield import Prime, Rationals, field_from_spec
from .tower import TowerData, infer_group, tower_data, unramified_quadratic_gens

CERTIFIED, PARTIAL, FAILED = "certified", "partial", "failed"


@dataclass
class PipelineConfig:
    bound: int = 10 ** 6
    prime_filter: str = "auto"
    workers: int = 1
    assume_lambda: int | None = None
    ell0_bound: int = 10 ** 5

    def to_json(self):
        return {"bound": self.bound, "filter": self.prime_filter, "workers": self.workers,
                "assume_lambda": self.assume_lambda, "ell0_bound": self.ell0_bound}


@contextmanager
def _stage(name: str):
    try:
        yield
    except TowerforgeError as e:
        if not getattr(e, "stage", None):
            e.stage = name
            e.args = (f"[{name}] {e.args[0] if e.args else ''}",) + e.args[1:]
        raise


# ------------------------------------------------------------- condition C_S

def check_cs(K, S) -> bool:
    """#Cl^S[2] == #Cl[2], i.e. S splits totally in the elementary 2-class field."""
    K = field_from_spec(K)
    if isinstance(K, Rationals):
        return True
    as_primes(K, S)
    return 2 ** K.class_group().two_rank == 2 ** K.s_class_group(list(S)).two_rank


def cs_compositum_rank(K, S) -> list[dict]:
    K = field_from_spec(K)
    S = sorted(int(s) for s in S)
    if len(S) > 5:
        raise DomainError("cs_compositum_rank is capped at |S| <= 5")
    if not check_cs(K, S):
        raise PreconditionError(f"condition C_S fails for S = {S}")
    base = v_group(K).dim
    rows = []
    for k in range(len(S) + 1):
        for X in combinations(S, k):
            d = v_group(K, X).dim - base
            if d != len(X):
                raise InternalInconsistency(f"compositum rank {d} != #X = {len(X)} for X = {X}")
            rows.append({"X": list(X), "rank": d})
    return rows


# ------------------------------------------------------------- augmentation

def _inert_everywhere(K, xs, primes) -> list:
    """Unramified classes x with every prime in `primes` inert in K(sqrt x)."""
    return [x for x in xs if all(K.unit_residue_symbol(x, P) == -1 for P in primes)]


def augment_sigma(K, S, tower: TowerData | None = None, bound: int = 10 ** 5) -> dict:
    """Sigma = S, or S + {l0} when an unramified Z/2-extension is inert at all of S.

    l0 is the smallest odd prime, split in K, prime to the discriminant and
    outside S, whose pinned prime splits completely in the elementary
    2-class field (its class lies in 2 Cl).
    """
    K = field_from_spec(K)
    Sp = as_primes(K, S)
    ells = [P.ell for P in Sp]
    if isinstance(K, Rationals) or not Sp:
        return {"sigma": ells, "ell0": None, "in_image": False, "witnesses": []}
    xs = unramified_quadratic_gens(K)
    wit = _inert_everywhere(K, xs, Sp)
    if not wit:
        return {"sigma": ells, "ell0": None, "in_image": False, "witnesses": []}
    G = K.group()
    squares = {G.op(c, c) for c in G.table}
    for ell in arith.primes_between(3, bound):
        if ell in ells or K.disc % ell == 0 or K.splitting_type(ell) != "split":
            continue
        P = K.pinned_prime(ell)
        if K.canonical(K.prime_form(P)) not in squares:
            continue
        # post hoc: split in every unramified quadratic extension
        if any(K.unit_residue_symbol(x, P) != 1 for x in xs):
            raise InternalInconsistency(f"l0 = {ell} has class in 2Cl but does not split")
        return {"sigma": sorted(ells + [ell]), "ell0": ell, "in_image": True,
                "witnesses": [str(x) for x in wit]}
    raise SearchFailure(f"no augmentation prime l0 up to {bound}", {"bound": bound})


# ------------------------------------------------------------ certificates

@dataclass
class StepCertificate:
    base: str
    S: list
    sigma: list
    ell0: int | None
    q: int
    prime: dict
    prime_filter: str
    filter_attempts: list
    frobenius: dict
    extension: dict
    inertia: dict
    inertia_audit: dict
    stability: dict
    status: str
    residue_degrees: dict

    def to_json(self):
        return {"base": self.base, "S": self.S, "sigma": self.sigma, "ell0": self.ell0,
                "q": self.q, "prime": self.prime, "filter": self.prime_filter,
                "filter_attempts": self.filter_attempts, "frobenius": self.frobenius,
                "extension": self.extension, "inertia": self.inertia,
                "inertia_audit": self.inertia_audit, "stability": self.stability,
                "status": self.status, "residue_degrees": self.residue_degrees}


@dataclass
class PipelineReport:
    field: str
    S: list
    group: str
    profile: dict
    hypothesis: dict
    steps: list = field(default_factory=list)
    final_field: str = ""
    claims: dict = field(default_factory=dict)
    residue_degrees: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.steps)

    def to_json(self):
        return {"field": self.field, "S": self.S, "group": self.group, "profile": self.profile,
                "hypothesis": self.hypothesis, "m": self.m,
                "steps": [s.to_json() for s in self.steps], "final_field": self.final_field,
                "claims": self.claims, "residue_degrees": self.residue_degrees,
                "config": self.config}


def residue_degrees(K, S) -> dict:
    """Residue degree in L_2(K)/K of the pinned prime above each l in S.

    For a tower of length <= 1 this is the order of the prime class in Cl_2.
    """
    K = field_from_spec(K)
    out = {}
    for P in as_primes(K, S):
        if isinstance(K, Rationals) or P.kind == "inert":
            out[P.ell] = 1
            continue
        G = K.group()
        o = G.element_order(K.canonical(K.prime_form(P)))
        out[P.ell] = 1 << arith.valuation(o, 2)
    return out


def _reduce_mod(K, x, P: Prime) -> int | None:
    """x mod a degree-one prime P (None when x is not a P-unit)."""
    A, B, den = K.elt(x).xyd()
    ell = P.ell
    if P.kind == "ramified":
        s = 0
    else:
        s = P.b * pow(2, -1, ell) % ell if K.disc % 4 == 0 else P.b % ell
    num = (A + B * s) % ell
    if num == 0 or den % ell == 0:
        return None
    return num * pow(den, -1, ell) % ell


def residuosity_check(K, y, x, primes) -> dict:
    """Is x a square modulo the prime of K(sqrt y) above each (inert) P?

    Over a degree-one P the residue field is F_l[t]/(t^2 - y); an explicit
    square root of x is exhibited and checked.
    """
    out = {}
    for P in primes:
        lab = P.label()
        if K.unit_residue_symbol(y, P) != -1:
            out[lab] = {"ok": False, "reason": "prime is not inert in N"}
            continue
        if P.kind == "inert":
            out[lab] = {"ok": True, "reason": "residue field of K is a subfield of index 2"}
            continue
        yb, xb = _reduce_mod(K, y, P), _reduce_mod(K, x, P)
        if yb is None or xb is None:
            out[lab] = {"ok": K.unit_residue_symbol(x, P) in (1, -1),
                        "reason": "non-unit reduction; symbol argument"}
            continue
        ell = P.ell
        if arith.kronecker(xb, ell) == 1:
            a, b = arith.sqrt_mod(xb, ell), 0
        else:
            a, b = 0, arith.sqrt_mod(xb * pow(yb, -1, ell) % ell, ell)
        sq = ((a * a + b * b * yb) % ell, 2 * a * b % ell)
        out[lab] = {"ok": sq == (xb, 0), "sqrt": [a, b], "model": f"F_{ell}[t]/(t^2 - {yb})"}
    return out


def _stability_evidence(K, N, tower: TowerData | None, group: str, S_primes, zbits) -> tuple:
    ev = {}
    if isinstance(K, Rationals):
        F = field_from_spec(int(N.kummer_gen))
        cg = F.class_group()
        ch = chevalley_details(N)
        ev.update({"tier": CERTIFIED, "h_N": cg.order, "cl2_N": cg.two_part,
                   "chevalley": ch["ambiguous"]})
        ok = cg.two_part == [] and ch["ambiguous"] == 1
        return (CERTIFIED if ok else FAILED), ev
    ch = chevalley_details(N)
    ev["chevalley_over_K"] = {k: ch[k] for k in ("ambiguous", "t", "unit_norm_index", "h_base")}
    checks = [ch["ambiguous"] >= 1]
    x = tower.class_field_gen if tower is not None else None
    if group == "C1":
        x = None
    if x is not None:
        ok_x, _ = unramified_test(relative_extension(K, x))
        new = not (K.is_square(x) or K.is_square(x * N.kummer_gen))
        ev["unramified_layer"] = {"generator": str(x), "unramified_over_K": ok_x,
                                  "nontrivial_over_N": new}
        res = residuosity_check(K, N.kummer_gen, x, S_primes)
        ev["residuosity"] = res
        checks += [ok_x, new] + [r["ok"] for r in res.values()]
    if tower is not None and tower.z is not None and tower.z != ():
        ev["stability_element"] = {"z": list(tower.z), "unit_basis": tower.unit_labels,
                                   "matched": list(zbits) == list(tower.z)}
        checks.append(list(zbits) == list(tower.z))
    elif group != "C1":
        ev["stability_element"] = {"z": None, "note": "stability block unavailable"}
    B = N.as_biquad()
    if B is not None:
        kd = kuroda_details(B)
        two = 1 << arith.valuation(kd["h"], 2)
        want = GROUP_TABLE[group][3] if group in ("C1", "C2") else None
        ev["kuroda"] = {"field": B.label(), "h": kd["h"], "two_part": two, "expected": want}
        checks.append(want is not None and two == want)
        tier = CERTIFIED
    else:
        ev["kuroda"] = None
        tier = PARTIAL
    if tower is None or (group != "C1" and not tower.available):
        tier = PARTIAL
    ev["tier"] = tier
    return (tier if all(checks) else FAILED), ev


def elimination_step(K, S, tower: TowerData | None = None,
                     config: PipelineConfig | None = None) -> tuple:
    """One elimination step over K; returns (N, StepCertificate)."""
    config = config or PipelineConfig()
    K = field_from_spec(K)
    S_primes = as_primes(K, S)
    S_ells = [P.ell for P in S_primes]
    if tower is None:
        with _stage("tower"):
            tower = tower_data(K, infer_group(K))
    group = tower.group
    with _stage("augment_sigma"):
        aug = augment_sigma(K, S_ells, tower, config.ell0_bound)
    sigma = aug["sigma"]
    with _stage("lattice_target"):
        target = lattice_target(K, sigma, tower if tower.z not in (None, ()) else None)
        datum = v_group(K, sigma)
    if config.prime_filter == "auto":
        filters = ["any"] if isinstance(K, Rationals) else ["inert", "degree1"]
    else:
        filters = [config.prime_filter]
    attempts = []
    hit = None
    with _stage("chebotarev_search"):
        for flt in filters:
            try:
                hit = chebotarev_search(K, datum, target.block_a, config.bound, flt,
                                        target.block_z, tower if target.block_z else None,
                                        exclude=sigma, workers=config.workers)
                attempts.append({"filter": flt, "outcome": "found", "q": hit.q,
                                 "stats": hit.stats})
                break
            except SearchFailure as e:
                attempts.append({"filter": flt, "outcome": "target unreachable under filter",
                                 "stats": e.stats})
        if hit is None:
            raise SearchFailure(f"no tame prime up to {config.bound} under filters {filters}",
                                {"attempts": attempts})
    with _stage("build_extension"):
        N = build_extension(K, hit.prime, inert=sigma)
    with _stage("certificate"):
        audit = frobenius_vector(hit.prime, datum)
        if audit.coords != tuple(target.block_a):
            raise InternalInconsistency("audited Frobenius differs from the target")
        inert = inertia_check(N, S_primes)
        extra = [P for ell in S_ells for P in K.primes_above(ell)] if not isinstance(K, Rationals) \
            else []
        extra += [K.pinned_prime(aug["ell0"])] if aug["ell0"] else []
        audit_map = inertia_check(N, extra) if extra else {}
        f0 = residue_degrees(K, S_ells)
        f1 = {ell: max(1, f // 2) if inert.get(P.label()) == "inert" else f
              for (ell, f), P in zip(f0.items(), S_primes)}
        status, ev = _stability_evidence(K, N, tower, group, S_primes, hit.z_bits)
        if any(v != "inert" for v in inert.values()):
            status = FAILED
    cert = StepCertificate(
        base=K.label(), S=S_ells, sigma=sigma, ell0=aug["ell0"], q=hit.q,
        prime=hit.prime.to_json(), prime_filter=hit.prime_filter, filter_attempts=attempts,
        frobenius={"basis": [str(b) for b in datum.elements], "tags": datum.tags(),
                   "target": list(target.block_a), "audit": list(audit.coords),
                   "target_mode": target.mode, "note": target.note},
        extension=N.to_json() | {"label": N.label()},
        inertia=inert, inertia_audit=audit_map, stability=ev, status=status,
        residue_degrees={"before": {str(k): v for k, v in f0.items()},
                         "after": {str(k): v for k, v in f1.items()}})
    return N, cert


# ---------------------------------------------------------------------- run

def run(K, S, group: str = "C1", config: PipelineConfig | None = None) -> PipelineReport:
    config = config or PipelineConfig()
    K = field_from_spec(K)
    group = canonical_group_name(group)
    S_primes = as_primes(K, S)
    S_ells = [P.ell for P in S_primes]
    h1, h2, e_G, _ = GROUP_TABLE[group]
    profile = TowerProfile.for_group(group, K.signature)
    A = a_invariant(profile)
    hyp = {"A_K": A, "h1": h1, "assume_lambda": config.assume_lambda}
    if A < h1 and config.assume_lambda is None:
        raise HypothesisFailure(
            f"hypothesis A_K >= h^1 fails: A_K = {A} < h1 = {h1} for {K.label()} with "
            f"G = {group}; pass --assume-lambda to override")
    with _stage("tower"):
        tower = tower_data(K, group)
    lam = tower.lam if config.assume_lambda is None else config.assume_lambda
    hyp["lambda"] = lam
    hyp["lambda_source"] = "computed" if config.assume_lambda is None else "override"
    if lam is None or lam < h1:
        raise HypothesisFailure(f"lambda = {lam} < h1 = {h1}")
    report = PipelineReport(K.label(), S_ells, group, profile.to_json(), hyp,
                            config=config.to_json())
    f = residue_degrees(K, S_ells)
    report.residue_degrees = {"initial": {str(k): v for k, v in f.items()}}
    F = K
    while any(v > 1 for v in f.values()):
        if report.m >= 1:
            raise DomainError("a second step needs governing data over a quartic base, "
                              "which is outside the supported fields")
        N, cert = elimination_step(F, S_ells, tower, config)
        report.steps.append(cert)
        if cert.status == FAILED:
            raise InternalInconsistency(f"step {report.m} certificate failed: {cert.stability}")
        f = {int(k): v for k, v in cert.residue_degrees["after"].items()}
        F = N
    report.residue_degrees["final"] = {str(k): v for k, v in f.items()}
    report.final_field = F.label()
    tracked = len(S_ells)
    tiers = [s.status for s in report.steps]
    report.claims = {
        "m_le_e_G": {"m": report.m, "e_G": e_G, "ok": report.m <= e_G},
        "S_F_count": {"S": tracked, "S_F": tracked if all(
            all(v == "inert" for v in s.inertia.values()) for s in report.steps) else None,
            "ok": all(all(v == "inert" for v in s.inertia.values()) for s in report.steps)},
        "split_in_tower": all(v == 1 for v in f.values()),
        "tower_stability": min(tiers, key=[FAILED, PARTIAL, CERTIFIED].index) if tiers
        else CERTIFIED,
        "galois_group": _group_evidence(tower),
    }
    if not report.claims["m_le_e_G"]["ok"]:
        raise InternalInconsistency(f"m = {report.m} exceeds e_G = {e_G}")
    return report


def _group_evidence(tower: TowerData) -> dict:
    out = {"group": tower.group, "cl2_base": tower.cl2}
    if tower.group == "C1":
        out["evidence"] = "Cl_2 of the base is trivial"
    elif tower.kuroda is not None:
        out["evidence"] = (f"Cl_2 of the base is Z/2 and h({tower.B.label()}) = "
                           f"{tower.kuroda['h']} is odd, so the tower stops at the first layer")
    else:
        out["evidence"] = "Cl_2 of the base matches G^ab; tower length not certified"
    return out


# ------------------------------------------------------ exact-sequence ranks

def _subgroup_basis(K, G, pred) -> list:
    """Reduced basis (exponent vectors on G) of the subgroup where pred holds."""
    good = []
    for exps in product((0, 1), repeat=G.dim):
        if pred(_product(K, G.elements, exps)):
            good.append(list(exps))
    if not good:
        return []
    M = gf2.as_matrix(good, G.dim)
    r = gf2.rank(M)
    if len(good) != 1 << r:
        raise InternalInconsistency("predicate does not cut out a subgroup")
    rows, piv = gf2.rref(M)
    return [list(map(int, rows[i])) for i in range(len(piv))]


def _unramified_2_inf(K, y) -> bool:
    if isinstance(K, Rationals):
        y = K.elt(y)
        return y > 0 and all(K.dyadic_unramified(y).values())
    return all(K.dyadic_unramified(y).values()) and all(s > 0 for s in K.real_signs(y))


def cohomology_rank_check(K, T, sigma) -> dict:
    """Dimensions in 0 -> H1(G_T^Sig) -> H1(G_T) -> (+)_Sig Z/2 -> (M_T^Sig)* -> (M_T)* -> 0.

    H1(G_T) is realised as the square classes supported on T giving
    extensions unramified at 2 and infinity; M_T^Sig = V_{K,T}^Sig.
    """
    K = field_from_spec(K)
    Tp, Sp = as_primes(K, T), as_primes(K, sigma)
    if set(Tp) & set(Sp):
        raise DomainError("T and Sigma must be disjoint")
    GT = v_group(K, Tp)
    h1_rows = _subgroup_basis(K, GT, lambda y: _unramified_2_inf(K, y))
    h1_elems = [_product(K, GT.elements, r) for r in h1_rows]

    def split_at_sigma(y):
        return _unramified_2_inf(K, y) and all(local_class_bits(K, y, P) == (0, 0) for P in Sp)

    h1s = len(_subgroup_basis(K, GT, split_at_sigma))
    local = len(Sp)
    MST = v_group_restricted(K, Sp, Tp)
    MT = v_group_restricted(K, (), Tp)
    psi = np.array([[local_class_bits(K, y, P)[1] for P in Sp] for y in h1_elems],
                   dtype=np.uint8).reshape(len(h1_elems), local)
    phi = np.array([[K.valuation(x, P) % 2 for P in Sp] for x in MST.elements],
                   dtype=np.uint8).reshape(MST.dim, local)
    rk_psi = gf2.rank(psi) if psi.size else 0
    rk_phi = gf2.rank(phi) if phi.size else 0
    composite = (psi.astype(int) @ phi.T.astype(int)) % 2 if psi.size and phi.size else None
    dims = (h1s, len(h1_rows), local, MST.dim, MT.dim)
    alt = dims[0] - dims[1] + dims[2] - dims[3] + dims[4]
    exact = {
        "at_H1_sigma": h1s == len(h1_rows) - rk_psi,
        "at_local": rk_psi + rk_phi == local,
        "at_M_sigma": MST.dim - rk_phi == MT.dim,
        "composite_zero": composite is None or not composite.any(),
    }
    return {"dims": list(dims), "labels": ["H1(G_T^Sigma)", "H1(G_T)", "local", "M_T^Sigma",
                                           "M_T"],
            "alternating_sum": alt, "rank_psi": rk_psi, "rank_phi": rk_phi,
            "exact": exact, "ok": alt == 0 and all(exact.values())}


# ---------------------------------------------------------- tame selection

def select_tame_set(F, n: int, tower: TowerData | None = None, bound: int = 10 ** 5,
                    assume_lambda: int | None = None) -> dict:
    """n tame primes whose Frobenius vectors on V_F are the first n basis duals.

    No nonempty subfamily then has a vanishing Frobenius sum, so no
    Z/2-extension is ramified exactly at any subfamily.
    """
    F = field_from_spec(F)
    if n < 1:
        raise DomainError("n must be positive")
    if assume_lambda is not None:
        lam, source = assume_lambda, "override"
    else:
        tower = tower or tower_data(F, infer_group(F))
        lam, source = tower.lam, "computed"
    G = v_group(F)
    if lam is None or lam < n or G.dim < n:
        raise PreconditionError(f"lambda = {lam} and dim V_F = {G.dim} do not reach n = {n}")
    chosen, certs = [], []
    for i in range(n):
        e = tuple(1 if j == i else 0 for j in range(G.dim))
        hit = chebotarev_search(F, G, e, bound, "any", exclude=chosen)
        chosen.append(hit.q)
        certs.append({"q": hit.q, "target": list(e), "audit": list(hit.frobenius),
                      "prime": hit.prime.to_json()})
    for k in range(1, n + 1):
        for X in combinations(chosen, k):
            if gras_exists(F, X):
                raise InternalInconsistency(f"subfamily {X} admits an extension")
    return {"field": F.label(), "n": n, "T": chosen, "lambda": lam, "lambda_source": source,
            "basis": [str(x) for x in G.elements], "primes": certs,
            "subfamilies_checked": 2 ** n - 1}
