"""F2[G]-modules for small 2-groups, plus the invariant A_K and tower diagnostics.

For a 2-group G an indecomposable F2[G]-module V is free iff the norm element
N_G = sum of all g acts nontrivially on V, and N_G has rank 1 on F2[G].  So the
free rank of M is rank(N_G | M); for cyclic G this is the number of Jordan
blocks of (g - 1) of full size |G|, which is computed separately as a check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .errors import DomainError, InternalInconsistency, PreconditionError

# name -> (h1, h2, exponent_log, order)
GROUP_TABLE = {
    "C1": (0, 0, 0, 1),
    "C2": (1, 1, 1, 2),
    "V4": (2, 3, 1, 4),
    "C4": (1, 1, 2, 4),
    "Q8": (2, 2, 2, 8),
    "D4": (2, 3, 2, 8),
}

# invariants of G^ab, which is Cl_2 for a tower with group G
ABELIANIZATION = {"C1": [], "C2": [2], "V4": [2, 2], "C4": [4], "Q8": [2, 2], "D4": [2, 2]}

MAX_WORK = 1 << 12


def group_info(name: str) -> tuple[int, int, int, int]:
    key = name.upper().replace("Z/2XZ/2", "V4").replace("Z/2", "C2").replace("Z/4", "C4")
    aliases = {"TRIVIAL": "C1", "1": "C1", "C2XC2": "V4", "K4": "V4", "D8": "D4"}
    key = aliases.get(key, key)
    if key not in GROUP_TABLE:
        raise DomainError(f"unsupported group {name!r}; supported: {', '.join(GROUP_TABLE)}")
    return GROUP_TABLE[key]


def canonical_group_name(name: str) -> str:
    info = group_info(name)
    return next(k for k, v in GROUP_TABLE.items() if v == info)


def _words(name: str, gens: list[np.ndarray]):
    """All group elements as products of the generator matrices."""
    n = gens[0].shape[0] if gens else 0
    eye = np.eye(n, dtype=np.uint8)

    def p(m, e):
        acc = eye
        for _ in range(e):
            acc = gf2.matmul(acc, m)
        return acc

    if name == "C1":
        return [eye]
    if name == "C2":
        return [eye, gens[0]]
    if name == "C4":
        return [p(gens[0], i) for i in range(4)]
    if name == "V4":
        return [gf2.matmul(p(gens[0], i), p(gens[1], j)) for i in range(2) for j in range(2)]
    # Q8 and D4: a of order 4, b of order 2 modulo <a>
    return [gf2.matmul(p(gens[0], i), p(gens[1], j)) for i in range(4) for j in range(2)]


def _relations_hold(name: str, gens: list[np.ndarray]) -> bool:
    if not gens:
        return name == "C1"
    n = gens[0].shape[0]
    eye = np.eye(n, dtype=np.uint8)
    mm = gf2.matmul

    def p(m, e):
        acc = eye
        for _ in range(e):
            acc = mm(acc, m)
        return acc

    eq = np.array_equal
    a = gens[0]
    if name == "C2":
        return eq(p(a, 2), eye)
    if name == "C4":
        return eq(p(a, 4), eye)
    b = gens[1]
    if name == "V4":
        return eq(p(a, 2), eye) and eq(p(b, 2), eye) and eq(mm(a, b), mm(b, a))
    ainv = p(a, 3)
    if name == "Q8":
        return eq(p(a, 4), eye) and eq(p(a, 2), p(b, 2)) and eq(mm(mm(b, a), gf2.inverse(b)), ainv)
    if name == "D4":
        return eq(p(a, 4), eye) and eq(p(b, 2), eye) and eq(mm(mm(b, a), b), ainv)
    return False


@dataclass
class F2GModule:
    group: str
    action: list  # generator matrices acting on column vectors

    def __post_init__(self):
        self.group = canonical_group_name(self.group)
        self.action = [np.asarray(a, dtype=np.uint8) % 2 for a in self.action]
        h1 = GROUP_TABLE[self.group][0]
        if len(self.action) != h1:
            raise DomainError(f"{self.group} needs {h1} generator matrices, got {len(self.action)}")
        for a in self.action:
            if a.shape != (self.dim, self.dim) or gf2.rank(a) != self.dim:
                raise DomainError("action matrices must be invertible and of equal size")
        if self.action and not _relations_hold(self.group, self.action):
            raise DomainError(f"action matrices do not satisfy the relations of {self.group}")

    @property
    def dim(self) -> int:
        return self.action[0].shape[0] if self.action else self._dim

    @classmethod
    def trivial_group(cls, dim: int) -> "F2GModule":
        m = cls.__new__(cls)
        m.group, m.action, m._dim = "C1", [], dim
        return m

    @property
    def order(self) -> int:
        return GROUP_TABLE[self.group][3]

    def elements(self) -> list[np.ndarray]:
        if self.group == "C1":
            return [np.eye(self.dim, dtype=np.uint8)]
        return _words(self.group, self.action)

    def norm_matrix(self) -> np.ndarray:
        acc = np.zeros((self.dim, self.dim), dtype=np.int64)
        for g in self.elements():
            acc += g
        return (acc % 2).astype(np.uint8)

    def conjugate(self, P: np.ndarray) -> "F2GModule":
        """The same module in the basis given by the columns of P."""
        if self.group == "C1":
            return F2GModule.trivial_group(self.dim)
        Pinv = gf2.inverse(P)
        return F2GModule(self.group, [gf2.matmul(gf2.matmul(Pinv, a), P) for a in self.action])

    def dual(self) -> "F2GModule":
        """Hom(M, F2) with (g f)(x) = f(g^-1 x)."""
        if self.group == "C1":
            return F2GModule.trivial_group(self.dim)
        return F2GModule(self.group, [gf2.inverse(a).T.copy() for a in self.action])

    def to_json(self):
        return {"group": self.group, "dim": self.dim,
                "action": [a.astype(int).tolist() for a in self.action]}


def regular_module(name: str) -> F2GModule:
    """F2[G] with basis the group elements (in the order of _words)."""
    name = canonical_group_name(name)
    n = GROUP_TABLE[name][3]
    if name == "C1":
        return F2GModule.trivial_group(1)
    if name in ("C2", "C4"):
        a = np.roll(np.eye(n, dtype=np.uint8), 1, axis=0)
        return F2GModule(name, [a])
    # left multiplication on elements a^i b^j, computed from a permutation model
    if name == "V4":
        elems = [(i, j) for i in range(2) for j in range(2)]
        mul = lambda x, y: ((x[0] + y[0]) % 2, (x[1] + y[1]) % 2)  # noqa: E731
        gens = [(1, 0), (0, 1)]
    else:
        elems = [(i, j) for i in range(4) for j in range(2)]
        if name == "D4":
            def mul(x, y):  # b a = a^-1 b
                i = (x[0] + (y[0] if x[1] == 0 else -y[0])) % 4
                return i, (x[1] + y[1]) % 2
        else:
            def mul(x, y):  # b a = a^-1 b, b^2 = a^2
                i = (x[0] + (y[0] if x[1] == 0 else -y[0])) % 4
                j = x[1] + y[1]
                if j == 2:
                    i, j = (i + 2) % 4, 0
                return i, j
        gens = [(1, 0), (0, 1)]
    idx = {e: k for k, e in enumerate(elems)}
    mats = []
    for g in gens:
        m = np.zeros((n, n), dtype=np.uint8)
        for e in elems:
            m[idx[mul(g, e)], idx[e]] = 1
        mats.append(m)
    return F2GModule(name, mats)


def trivial_module(name: str, dim: int) -> F2GModule:
    name = canonical_group_name(name)
    if name == "C1":
        return F2GModule.trivial_group(dim)
    eye = np.eye(dim, dtype=np.uint8)
    return F2GModule(name, [eye.copy() for _ in range(GROUP_TABLE[name][0])])


def direct_sum(*mods: F2GModule) -> F2GModule:
    name = mods[0].group
    if name == "C1":
        return F2GModule.trivial_group(sum(m.dim for m in mods))
    k = len(mods[0].action)
    mats = []
    for i in range(k):
        n = sum(m.dim for m in mods)
        out = np.zeros((n, n), dtype=np.uint8)
        o = 0
        for m in mods:
            out[o:o + m.dim, o:o + m.dim] = m.action[i]
            o += m.dim
        mats.append(out)
    return F2GModule(name, mats)


def jordan_profile(M: F2GModule) -> list[int]:
    """Cyclic G: number of Jordan blocks of g - 1 of each size 1..|G|."""
    if M.group not in ("C2", "C4"):
        raise DomainError("Jordan profile is defined for cyclic groups")
    n = M.order
    N = (M.action[0] + np.eye(M.dim, dtype=np.uint8)) % 2
    ranks = [M.dim]
    P = np.eye(M.dim, dtype=np.uint8)
    for _ in range(n):
        P = gf2.matmul(P, N)
        ranks.append(gf2.rank(P))
    at_least = [ranks[j] - ranks[j + 1] for j in range(n)]  # blocks of size > j
    return [at_least[j] - (at_least[j + 1] if j + 1 < n else 0) for j in range(n)]


def decompose(M: F2GModule) -> tuple[int, int]:
    """(lambda, torsion_dim) with M = F2[G]^lambda + N, N without free summands."""
    if M.group == "C1":
        return M.dim, 0
    if M.order * M.dim > MAX_WORK:
        raise DomainError(f"|G| * dim = {M.order * M.dim} exceeds the supported bound {MAX_WORK}")
    lam = gf2.rank(M.norm_matrix())
    if M.group in ("C2", "C4"):
        prof = jordan_profile(M)
        if prof[-1] != lam:
            raise InternalInconsistency(f"Jordan profile {prof} disagrees with norm rank {lam}")
    return lam, M.dim - lam * M.order


def free_generators(M: F2GModule, k: int) -> list[np.ndarray]:
    """k vectors generating a free submodule F2[G]^k (norm images independent)."""
    N = M.norm_matrix()
    chosen, images = [], []
    for j in range(M.dim):
        e = np.zeros(M.dim, dtype=np.uint8)
        e[j] = 1
        img = gf2.matmul(N, e.reshape(-1, 1)).reshape(-1)
        if gf2.rank(images + [img]) == len(images) + 1:
            chosen.append(e)
            images.append(img)
            if len(chosen) == k:
                return chosen
    raise PreconditionError(f"module has free rank < {k}")


def stability_target(M: F2GModule, lam: int | None = None, d: int | None = None):
    """z = sum_i (g_i - 1) e_i over d free generators e_i; returns (z, [e_i]).

    z lies in the augmentation ideal image I_G M.
    """
    if d is None:
        d = GROUP_TABLE[M.group][0]
    if lam is None:
        lam = decompose(M)[0]
    if lam < d:
        raise PreconditionError(f"lambda = {lam} < d = {d}: stability target needs lambda >= d")
    if d == 0:
        return np.zeros(M.dim, dtype=np.uint8), []
    es = free_generators(M, d)
    z = np.zeros(M.dim, dtype=np.uint8)
    eye = np.eye(M.dim, dtype=np.uint8)
    for g, e in zip(M.action, es):
        z ^= gf2.matmul((g + eye) % 2, e.reshape(-1, 1)).reshape(-1)
    return z, es


# ------------------------------------------------------------------ profile

@dataclass
class TowerProfile:
    h1: int
    h2: int
    exponent_log: int
    r1: int
    r2: int
    zeta_in_K: bool = True
    group: str = ""

    @classmethod
    def for_group(cls, name: str, signature: tuple[int, int], h1: int | None = None,
                  h2: int | None = None) -> "TowerProfile":
        t_h1, t_h2, e, _ = group_info(name)
        return cls(t_h1 if h1 is None else h1, t_h2 if h2 is None else h2, e,
                   signature[0], signature[1], True, canonical_group_name(name))

    def to_json(self):
        return {"group": self.group, "h1": self.h1, "h2": self.h2,
                "exponent_log": self.exponent_log, "r1": self.r1, "r2": self.r2,
                "zeta_in_K": self.zeta_in_K}


def a_invariant(P: TowerProfile) -> int:
    if P.zeta_in_K:
        return P.r1 + P.r2 - P.h2
    return P.r1 + P.r2 - P.h2 + P.h1 - 1


def a_growth(P: TowerProfile) -> int:
    """A of a Z/2 step field unramified at infinity: A_K + (r1 + r2)."""
    return a_invariant(P) + P.r1 + P.r2


def gs_diagnostics(d: int, r: int, r1: int, r2: int, s: int) -> dict:
    if d == 0:
        return {"d": 0, "r": r, "vacuous": True, "golod_shafarevich_ok": True,
                "infinite_tower_flag": False, "sk_window": [0, r1 + r2 + s],
                "r_minus_d": r - d, "in_window": True,
                "implied_lower_bound": "none (trivial group)"}
    gs_ok = 4 * r > d * d
    window = [0, r1 + r2 + s]
    rd = r - d
    bound = d * d / 4 - d
    return {"d": d, "r": r, "vacuous": False,
            "golod_shafarevich_ok": gs_ok,
            "infinite_tower_flag": not gs_ok,
            "sk_window": window, "r_minus_d": rd,
            "in_window": window[0] <= rd <= window[1],
            "implied_lower_bound": f"r1 + r2 + #S > d^2/4 - d = {bound:g}",
            "lower_bound_met": r1 + r2 + s > bound}
