import itertools

import numpy as np
import pytest

from rauzylab.discrete_geometry import (DualTable, Face, Patch, PatchBudgetExceeded, SeedNotContained,
                                        boundary_faces, dual_table, e1_star, e1_star_iterate, fernique_check,
                                        gamma_mask, gamma_membership, gamma_patch, geometric_coincidence_check,
                                        minimal_combinatorial_radius, radius_growth, strong_coincidence_check)
from rauzylab.sadic import parse_directive
from rauzylab.substitution import Substitution, builtin_family, fibonacci_variant, tribonacci
from rauzylab import matrices as mx


def F(x, i):
    return Face(tuple(x), i)


def test_gamma_membership():
    brute = {(x, i) for x in itertools.product((-1, 0, 1), repeat=3) for i in (1, 2, 3) if sum(x) == 0}
    assert gamma_patch((1, 1, 1), 1).faces() == {F(x, i) for x, i in brute}
    assert len(brute) == 21
    assert not gamma_membership((1, 1, 2), ((1, 0, -1), 3))
    assert gamma_membership((1, 1, 2), ((0, 0, 0), 3))
    assert not gamma_membership((1, 1, 1), ((0, 0, 1), 1))


def test_gamma_patch_is_one_face_per_column():
    # every vertical line x + Z e_3 meets Gamma(w) in exactly one face sum over types
    p = gamma_patch((1, 2, 3), 4)
    assert gamma_mask((1, 2, 3), p.coords, p.types).all()


def test_tribonacci_e1_star_values():
    t = tribonacci()
    assert e1_star(t, F((0, 0, 0), 1)).faces() == {F((0, 0, 0), 1), F((0, 0, 0), 2), F((0, 0, 0), 3)}
    assert e1_star(t, F((0, 0, 0), 2)).faces() == {F((0, 0, 1), 1)}
    assert e1_star(t, F((0, 0, 0), 3)).faces() == {F((0, 0, 1), 2)}


def test_e1_star_translation_equivariance():
    t = tribonacci()
    inv = t.inverse_incidence
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = tuple(int(v) for v in rng.integers(-5, 6, 3))
        i = int(rng.integers(1, 4))
        shifted = e1_star(t, F((0, 0, 0), i)).translate(mx.matvec(inv, x))
        assert e1_star(t, F(x, i)) == shifted


def test_e1_star_is_contravariant():
    a, b = builtin_family("brun")[1], builtin_family("brun")[3]
    p = gamma_patch((1, 1, 1), 2)
    assert e1_star(b, e1_star(a, p)) == e1_star(a.compose(b), p)


def test_e1_star_budget():
    with pytest.raises(PatchBudgetExceeded):
        e1_star_iterate([tribonacci()], Patch.seed(3), steps=30, budget=1000)


def test_tribonacci_patch_lies_in_plane():
    p = e1_star_iterate([tribonacci()], Patch.seed(3), steps=12)
    M = mx.product([tribonacci().incidence] * 12, 3)
    w = mx.matvec(mx.transpose(M), (1, 1, 1))
    assert gamma_mask(w, p.coords, p.types).all()
    raw = len(np.unique(np.column_stack([p.coords, p.types]), axis=0))
    assert raw == len(p)


@pytest.mark.parametrize("spec,length", [("tribonacci", 1), ("tribonacci", 3), ("brun:(1,2,3)^w", 3),
                                         ("brun:(3,1,2,2)^w", 4)])
def test_fernique(spec, length):
    block = parse_directive(spec).window(0, length)
    for w in [(1, 1, 1), (1, 2, 3), (2, 1, 5)]:
        rep = fernique_check(block, w, 3)
        assert rep.outside_target == 0 and rep.overlaps == 0


def test_fernique_negative_control():
    t = tribonacci()
    good = dual_table(t)
    bad = DualTable(good.inverse, {i: [((0, 0, 0), 1) if j == 2 else (off, j) for off, j in ents]
                                   for i, ents in good.entries.items()})
    rep = fernique_check([t], (1, 1, 1), 3, table_override={t: bad})
    assert rep.outside_target > 0 or rep.overlaps > 0


def test_strong_coincidence():
    fib = fibonacci_variant()
    assert strong_coincidence_check([fib, fib]).ok
    swap = Substitution.parse("1->2,2->1")
    for l in range(1, 5):
        assert not strong_coincidence_check([swap] * l).ok
    same_start = Substitution.parse("1->12,2->1")
    res = strong_coincidence_check([same_start])
    assert res.ok and res.witnesses[(1, 2)] == (1, (0, 0))


def test_strong_coincidence_tribonacci():
    res = strong_coincidence_check([tribonacci()])
    assert res.ok


def test_geometric_coincidence_tribonacci():
    res = geometric_coincidence_check(parse_directive("tribonacci"), 10)
    assert res.found and res.ball_faces > 0


def test_radius_of_seed_and_small_patches():
    assert minimal_combinatorial_radius(Patch.seed(3)) == 1
    with pytest.raises(SeedNotContained):
        minimal_combinatorial_radius(Patch.from_faces([F((0, 0, 0), 1)]), Patch.seed(3))


def test_gamma_ball_radius():
    p = gamma_patch((1, 1, 1), 2)
    assert minimal_combinatorial_radius(p) == 3
    assert boundary_faces(p) < p.faces()


def test_reference_periodic_patch_radius_six():
    assert minimal_combinatorial_radius(gamma_patch((1, 1, 1), 5)) == 6


def test_radius_growth_nondecreasing():
    rows = radius_growth(parse_directive("ar:(1,1,2,2,3,3)^w").window(0, 6), 8)
    radii = [r for _, _, r in rows]
    assert radii == sorted(radii) and radii[-1] >= 2


def test_patch_text_roundtrip():
    p = gamma_patch((1, 2, 3), 2)
    assert Patch.from_lines(p.to_lines()) == p
    assert p.union(p) == p and p.issubset(p.union(Patch.seed(3)))
