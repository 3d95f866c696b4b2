"""Linear algebra over GF(2) on numpy uint8 arrays."""

from __future__ import annotations

import numpy as np


def as_matrix(rows, ncols: int | None = None) -> np.ndarray:
    m = np.array(rows, dtype=np.uint8) % 2
    if m.ndim == 1:
        m = m.reshape(1, -1) if m.size else np.zeros((0, ncols or 0), dtype=np.uint8)
    if m.size == 0 and ncols is not None:
        m = m.reshape(m.shape[0], ncols)
    return m


def rref(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = np.array(m, dtype=np.uint8) % 2
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        i = r + hits[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
        mask = a[:, c].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m)[1])


def nullspace(m) -> np.ndarray:
    """Basis (as rows) of {x : m @ x = 0}."""
    m = np.asarray(m, dtype=np.uint8)
    rows, cols = m.shape
    if rows == 0:
        return np.eye(cols, dtype=np.uint8)
    a, pivots = rref(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for i, p in enumerate(pivots):
            v[p] = a[i, f]
        basis.append(v)
    if not basis:
        return np.zeros((0, cols), dtype=np.uint8)
    return np.array(basis, dtype=np.uint8)


def left_nullspace(m) -> np.ndarray:
    """Basis of {y : y @ m = 0}."""
    return nullspace(np.asarray(m, dtype=np.uint8).T)


def solve(a, b):
    """Some x with a @ x = b over GF(2), or None."""
    a = np.asarray(a, dtype=np.uint8) % 2
    b = np.asarray(b, dtype=np.uint8).reshape(-1) % 2
    rows, cols = a.shape
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    r, pivots = rref(aug)
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = r[i, cols]
    return x


def in_span(rows, v) -> bool:
    rows = np.asarray(rows, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8).reshape(1, -1)
    if rows.size == 0:
        return not v.any()
    return rank(np.vstack([rows, v])) == rank(rows)


def inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.uint8) % 2
    n = m.shape[0]
    aug = np.concatenate([m, np.eye(n, dtype=np.uint8)], axis=1)
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular over GF(2)")
    return r[:, n:]


def matmul(a, b) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64) % 2).astype(np.uint8)


def random_invertible(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if rank(m) == n:
            return m
