import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from towerforge import gf2
from towerforge.abelian import AbelianGroup, quotient_invariants, smith_normal_form
from towerforge.forms import (Form, compose, cycle, is_reduced_definite, is_reduced_indefinite,
                              reduce_definite, reduce_indefinite, reduced_forms_definite,
                              reduced_forms_indefinite)

from oracles import reduced_forms_brute


@pytest.mark.parametrize("D", [-3, -4, -7, -15, -20, -23, -47, -84, -420, -3299])
def test_reduced_definite_matches_box_scan(D):
    assert sorted(f.as_tuple() for f in reduced_forms_definite(D)) == sorted(reduced_forms_brute(D))


def test_reduce_definite_tracks_matrix():
    for f in [Form(6, 7, 3), Form(101, 93, 22), Form(5, -9, 5), Form(3, 4, 2)]:
        g, M = reduce_definite(f)
        assert is_reduced_definite(g)
        assert f.transform(M) == g
        assert M[0][0] * M[1][1] - M[0][1] * M[1][0] == 1
    assert reduce_definite(Form(6, 7, 3))[0] == Form(2, 1, 3)


def test_reduce_indefinite_and_cycles():
    g, M = reduce_indefinite(Form(5, 0, -2))
    assert is_reduced_indefinite(g)
    assert Form(5, 0, -2).transform(M) == g
    forms = reduced_forms_indefinite(40)
    assert len(forms) == 8
    cycles = {frozenset(cycle(f)) for f in forms}
    assert len(cycles) == 2


def test_composition_examples():
    assert compose(Form(2, 1, 3), Form(2, 1, 3)) == (1, Form(4, 5, 3))
    d, f = compose(Form(2, 1, 3), Form(2, -1, 3))
    assert d == 2 and f.a == 1


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([-23, -47, -71, -84, -104, -231, -420]), st.data())
def test_composition_associative(D, data):
    forms = reduced_forms_definite(D)
    f, g, h = (data.draw(st.sampled_from(forms)) for _ in range(3))
    red = lambda x: reduce_definite(x)[0]  # noqa: E731
    fg = red(compose(f, g)[1])
    gh = red(compose(g, h)[1])
    assert red(compose(fg, h)[1]) == red(compose(f, gh)[1])
    assert red(compose(f, g)[1]) == red(compose(g, f)[1])


def test_smith_normal_form():
    rel = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    diag, V, Vinv = smith_normal_form(rel)
    assert sorted(abs(d) for d in diag) == [2, 6, 12]
    n = 3
    for i in range(n):
        for j in range(n):
            assert sum(V[i][k] * Vinv[k][j] for k in range(n)) == int(i == j)


def test_abelian_group_cyclic_product():
    # Z/4 x Z/6 as pairs
    op = lambda x, y: ((x[0] + y[0]) % 4, (x[1] + y[1]) % 6)  # noqa: E731
    G = AbelianGroup((0, 0), op, [(1, 0), (0, 1), (1, 1)])
    assert G.order() == 24
    assert sorted(G.invariants) == [2, 12]
    for g, d in zip(G.generators, G.invariants):
        assert G.element_order(g) == d
    for x in [(3, 5), (2, 2), (0, 3)]:
        assert G.power_of_gens(G.log(x)) == x
    inv, lifts, log = quotient_invariants(G, [(2, 0)])
    assert math.prod(inv) == 12


def test_gf2_basics():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m = rng.integers(0, 2, size=(5, 7), dtype=np.uint8)
        N = gf2.nullspace(m)
        assert N.shape[0] == 7 - gf2.rank(m)
        if N.size:
            assert not gf2.matmul(m, N.T).any()
        x = rng.integers(0, 2, size=7, dtype=np.uint8)
        b = gf2.matmul(m, x.reshape(-1, 1)).reshape(-1)
        y = gf2.solve(m, b)
        assert y is not None and np.array_equal(gf2.matmul(m, y.reshape(-1, 1)).reshape(-1), b)
    A = gf2.random_invertible(6, rng)
    assert np.array_equal(gf2.matmul(A, gf2.inverse(A)), np.eye(6, dtype=np.uint8))
    assert gf2.solve([[1, 1], [1, 1]], [1, 0]) is None
