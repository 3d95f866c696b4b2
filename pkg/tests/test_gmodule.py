import re
from pathlib import Path

import numpy as np
import pytest

from towerforge import gf2
from towerforge.errors import DomainError, PreconditionError
from towerforge.gmodule import (GROUP_TABLE, F2GModule, TowerProfile, a_growth, a_invariant,
                                decompose, direct_sum, group_info, jordan_profile,
                                regular_module, stability_target, trivial_module,
                                gs_diagnostics)

SOURCE_TEXT = (Path(__file__).resolve().parents[1] / "paper.md").read_text()


def random_invertible(n, rng):
    while True:
        P = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
        if gf2.rank(P) == n:
            return P


def jordan_c4(sizes):
    """C4-module with Jordan blocks of g - 1 of the given sizes (each <= 4)."""
    n = sum(sizes)
    g = np.eye(n, dtype=np.uint8)
    o = 0
    for s in sizes:
        for i in range(s - 1):
            g[o + i + 1, o + i] = 1
        o += s
    return F2GModule("C4", [g])


def test_group_table():
    assert group_info("Z/2") == (1, 1, 1, 2)
    assert group_info("V4") == (2, 3, 1, 4)
    assert GROUP_TABLE["Q8"][:2] == (2, 2)
    assert GROUP_TABLE["D4"][:2] == (2, 3)
    with pytest.raises(DomainError):
        group_info("S3")


@pytest.mark.parametrize("name", ["C2", "V4", "C4", "Q8", "D4"])
def test_regular_module_is_free_of_rank_one(name):
    R = regular_module(name)
    assert decompose(R) == (1, 0)
    assert decompose(R.dual()) == (1, 0)


def test_decompose_examples():
    assert decompose(trivial_module("C2", 1)) == (0, 1)
    M = direct_sum(regular_module("C2"), regular_module("C2"), trivial_module("C2", 1))
    rng = np.random.default_rng(3)
    assert decompose(M.conjugate(random_invertible(M.dim, rng))) == (2, 1)


def test_relations_are_enforced():
    with pytest.raises(DomainError):
        # an element of order 3 is not an involution
        F2GModule("C2", [np.array([[0, 1], [1, 1]])])


def test_basis_invariance_c2_and_v4():
    rng = np.random.default_rng(11)
    for name in ("C2", "V4"):
        for k in range(3):
            for j in range(3):
                parts = [regular_module(name)] * k + [trivial_module(name, 1)] * j
                if not parts:
                    continue
                M = direct_sum(*parts)
                for _ in range(5):
                    lam, tors = decompose(M.conjugate(random_invertible(M.dim, rng)))
                    assert (lam, tors) == (k, j)


def test_c4_jordan_profile_and_lambda():
    M = jordan_c4([4, 4, 2, 1, 3])
    assert jordan_profile(M) == [1, 1, 1, 2]
    assert decompose(M) == (2, 6)


def test_free_plus_torsion_additivity():
    N = jordan_c4([3, 2])
    assert decompose(N)[0] == 0
    M = direct_sum(regular_module("C4"), regular_module("C4"), N)
    assert decompose(M)[0] == 2


def test_stability_target_regular_c2():
    z, es = stability_target(regular_module("C2"), 1, 1)
    assert z.tolist() == [1, 1]
    assert len(es) == 1


def test_stability_target_two_free_summands():
    M = direct_sum(regular_module("C2"), regular_module("C2"))
    z, _ = stability_target(M, 2, 1)
    assert z.tolist() == [1, 1, 0, 0]
    # z lies in the image of g - 1
    g1 = (M.action[0] + np.eye(4, dtype=np.uint8)) % 2
    assert gf2.rank(np.hstack([g1, z.reshape(-1, 1)])) == gf2.rank(g1)


def test_stability_target_needs_lambda():
    with pytest.raises(PreconditionError):
        stability_target(trivial_module("C2", 2), 0, 1)


def test_a_invariant_examples():
    assert a_invariant(TowerProfile.for_group("C2", (2, 0))) == 1
    assert a_invariant(TowerProfile.for_group("C1", (1, 0))) == 1
    assert a_invariant(TowerProfile.for_group("C2", (0, 1))) == 0
    # branch without roots of unity: r1 + r2 - h2 + h1 - 1
    P = TowerProfile(h1=2, h2=3, exponent_log=1, r1=2, r2=1, zeta_in_K=False)
    assert a_invariant(P) == 2 + 1 - 3 + 2 - 1


def test_a_growth_formula_matches_source():
    assert "A_F = A_K + (p-1)" in SOURCE_TEXT
    assert a_growth(TowerProfile.for_group("C2", (2, 0))) == 3
    assert a_growth(TowerProfile.for_group("C1", (1, 0))) == 2
    assert a_growth(TowerProfile.for_group("C2", (0, 1))) == 1


def test_a_growth_composes_stepwise():
    P = TowerProfile.for_group("V4", (3, 1))
    A = a_invariant(P)
    for m in range(1, 4):
        A = a_growth(P)
        P = TowerProfile(P.h1, P.h2, P.exponent_log, 2 * P.r1, 2 * P.r2, True, P.group)
        assert a_invariant(P) == A


def test_gs_diagnostics_examples():
    assert re.search(r"r> d\^2/4", SOURCE_TEXT)
    g = gs_diagnostics(1, 1, 2, 0, 1)
    assert g["golod_shafarevich_ok"] and g["sk_window"] == [0, 3] and g["in_window"]
    g = gs_diagnostics(5, 6, 1, 0, 0)
    assert g["infinite_tower_flag"]
    assert gs_diagnostics(0, 0, 1, 0, 0)["vacuous"]
