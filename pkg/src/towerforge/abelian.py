"""Finite abelian groups given by an explicit multiplication on hashable elements.

The group is built by adjoining generators one at a time, keeping a discrete
log table; the resulting triangular relation lattice is diagonalised with a
Smith normal form to obtain invariant factors and matching generators.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Sequence


def smith_normal_form(rel: list[list[int]]):
    """Return (diag, V, Vinv) with U @ rel @ V = diag(d_1, ..., d_n) for some unimodular U.

    rel is a square integer matrix of full rank (rows are relations).
    """
    n = len(rel)
    a = [list(row) for row in rel]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j, k, t):  # col_j += t * col_k
        for row in a:
            row[j] += t * row[k]
        for row in V:
            row[j] += t * row[k]
        # inverse: row_k -= t * row_j
        Vinv[k] = [x - t * y for x, y in zip(Vinv[k], Vinv[j])]

    def col_swap(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]
        Vinv[j], Vinv[k] = Vinv[k], Vinv[j]

    def col_neg(j):
        for row in a:
            row[j] = -row[j]
        for row in V:
            row[j] = -row[j]
        Vinv[j] = [-x for x in Vinv[j]]

    for t in range(n):
        while True:
            # pivot: smallest nonzero entry in the trailing block
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            i, j = best
            a[t], a[i] = a[i], a[t]
            if j != t:
                col_swap(t, j)
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
            p = a[t][t]
            done = True
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    col_op(j, t, -q)
                if a[t][j]:
                    done = False
            for i in range(t + 1, n):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    done = False
            if not done:
                continue
            # divisibility condition on the trailing block
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if a[i][j] % p), None)
            if bad is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
    return [a[i][i] for i in range(n)], V, Vinv


class AbelianGroup:
    """Subgroup generated by `gens` inside a group with operation `op`."""

    def __init__(self, identity: Hashable, op: Callable, gens: Iterable, limit: int | None = None):
        self.identity = identity
        self.op = op
        self.raw_gens: list = []
        self.table: dict = {identity: ()}
        rels: list[list[int]] = []
        for g in gens:
            if g in self.table:
                continue
            k = len(self.raw_gens)
            # smallest m with g^m in current subgroup
            m, x = 1, g
            while x not in self.table:
                x = op(x, g)
                m += 1
            coset_reps = [identity]
            y = identity
            for _ in range(m - 1):
                y = op(y, g)
                coset_reps.append(y)
            old = list(self.table.items())
            new: dict = {}
            for e, vec in old:
                vec = vec + (0,) * (k - len(vec))
                for j, rep in enumerate(coset_reps):
                    new[op(e, rep) if j else e] = vec + (j,)
            self.table = new
            if limit is not None and len(self.table) > limit:
                raise OverflowError("group exceeds limit")
            back = self.table[x]
            rel = [-c for c in back[:k]] + [m]
            rels.append(rel)
            self.raw_gens.append(g)
        n = len(self.raw_gens)
        self.table = {e: v + (0,) * (n - len(v)) for e, v in self.table.items()}
        self.relations = [r + [0] * (n - len(r)) for r in rels]
        self._diagonalise()

    def _diagonalise(self):
        n = len(self.raw_gens)
        if n == 0:
            self.invariants, self.generators, self._V = [], [], []
            return
        diag, V, Vinv = smith_normal_form(self.relations)
        keep = [i for i, d in enumerate(diag) if abs(d) != 1]
        self._V = V
        self._keep = keep
        self.invariants = [abs(diag[i]) for i in keep]
        self.generators = [self.element(Vinv[i]) for i in keep]

    def element(self, vec: Sequence[int]):
        """Product of raw generators with the given exponents."""
        acc = self.identity
        for g, e in zip(self.raw_gens, vec):
            acc = self.op(acc, self._pow(g, e))
        return acc

    def _pow(self, g, e):
        if e < 0:
            # invert via order
            e %= self.element_order(g)
        acc, base = self.identity, g
        while e:
            if e & 1:
                acc = self.op(acc, base)
            base = self.op(base, base)
            e >>= 1
        return acc

    def element_order(self, g) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.op(x, g)
            k += 1
        return k

    def order(self) -> int:
        return len(self.table)

    def __contains__(self, x) -> bool:
        return x in self.table

    def raw_log(self, x) -> tuple:
        return self.table[x]

    def log(self, x) -> list[int]:
        """Coordinates of x in terms of self.generators (mod invariants)."""
        vec = self.table[x]
        n = len(vec)
        out = []
        for i, d in zip(self._keep, self.invariants):
            c = sum(vec[k] * self._V[k][i] for k in range(n))
            out.append(c % d)
        return out

    def power_of_gens(self, coords: Sequence[int]):
        acc = self.identity
        for g, e, d in zip(self.generators, coords, self.invariants):
            acc = self.op(acc, self._pow(g, e % d))
        return acc


def quotient_invariants(group: AbelianGroup, sub_gens: Iterable):
    """Invariants of group / <sub_gens> plus lifts of the quotient's generators.

    Returns (invariants, lifts, log) where log(x) gives coordinates of the image of x.
    """
    n = len(group.invariants)
    rels = [[d if i == j else 0 for j in range(n)] for i, d in enumerate(group.invariants)]
    for h in sub_gens:
        rels.append(list(group.log(h)))
    if n == 0:
        return [], [], lambda x: []
    # reduce the (m x n) relation matrix to square full rank via SNF on its HNF
    sq = _hnf_square(rels, n)
    diag, V, Vinv = smith_normal_form(sq)
    keep = [i for i, d in enumerate(diag) if abs(d) != 1]
    invariants = [abs(diag[i]) for i in keep]
    lifts = [group.power_of_gens(Vinv[i]) for i in keep]

    def log(x):
        c = group.log(x)
        return [sum(c[k] * V[k][i] for k in range(n)) % d for i, d in zip(keep, invariants)]

    return invariants, lifts, log


def _hnf_square(rows: list[list[int]], n: int) -> list[list[int]]:
    """Row-reduce an integer matrix with full column rank to an n x n upper triangular basis."""
    rows = [list(r) for r in rows if any(r)]
    out = []
    for c in range(n):
        while True:
            cand = [r for r in rows if r[c]]
            if not cand:
                raise ValueError("relation matrix is not of full rank")
            piv = min(cand, key=lambda r: abs(r[c]))
            others = [r for r in rows if r is not piv]
            done = True
            new_rows = []
            for r in others:
                if r[c]:
                    q = r[c] // piv[c]
                    r = [x - q * y for x, y in zip(r, piv)]
                    if r[c]:
                        done = False
                if any(r):
                    new_rows.append(r)
            if done:
                out.append(piv)
                rows = new_rows
                break
            rows = new_rows + [piv]
    return out
