from fractions import Fraction

import numpy as np
import pytest

from rauzylab.sadic import generalized_right_eigenvector, limit_sequences, parse_directive
from rauzylab.rauzy import (AmbiguousMembership, ProjectionFrame, bounded_remainder_probe, domain_exchange_orbit,
                            hausdorff, interval_visits, natural_coding_crosscheck_interval,
                            natural_coding_crosscheck_torus, rauzy_cloud, representation_point, set_equation_check,
                            subtile_shrink_check, subtile_visits, tiling_multiplicity_sample, torus_coding)


@pytest.fixture(scope="module")
def tri_cloud(tribonacci_directive):
    return rauzy_cloud(tribonacci_directive, 20_000)


def test_frame_projects_along_u(tribonacci_directive):
    f = ProjectionFrame.for_directive(tribonacci_directive)
    assert np.allclose(f.project(f.u), 0, atol=1e-12)
    x = np.array([[3.0, -1.0, -2.0]])
    assert np.allclose(f.lift(f.project(x)), x)
    assert abs(np.linalg.det(f.lattice_basis())) > 0


def test_cloud_is_bounded_and_labelled(tri_cloud):
    assert len(tri_cloud) == 20_000
    assert set(np.unique(tri_cloud.labels)) == {1, 2, 3}
    assert tri_cloud.diameter_sup() < 3


def test_sturmian_subtiles_abut(fibonacci_directive):
    c = rauzy_cloud(fibonacci_directive, 5000)
    a, b = c.subtile(1).ravel(), c.subtile(2).ravel()
    gap = min(abs(a.max() - b.min()), abs(b.max() - a.min()))
    assert gap < 3 * c.nn_median()
    assert a.max() <= b.min() + 1e-9 or b.max() <= a.min() + 1e-9


def test_hausdorff_basic():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert hausdorff(a, a) == 0
    assert hausdorff(a, a + [0, 0.5]) == pytest.approx(0.5)


@pytest.mark.parametrize("l", [1, 2])
def test_set_equation(tribonacci_directive, l):
    reps = set_equation_check(tribonacci_directive, 0, l, 5000)
    assert all(r.ok for r in reps), [(r.distance, r.tolerance) for r in reps]


def test_set_equation_detects_wrong_translate(tribonacci_directive):
    # shifting the parent by a lattice vector breaks the equation
    reps = set_equation_check(tribonacci_directive, 0, 1, 3000)
    c = rauzy_cloud(tribonacci_directive, 3000)
    shifted = c.subtile(1) + c.frame.translation(2)
    assert hausdorff(shifted, c.subtile(1)) > 10 * reps[0].tolerance


def test_subtiles_shrink(tribonacci_directive):
    sizes = [s for _, s in subtile_shrink_check(tribonacci_directive, 6, N=1000)]
    assert sizes[-1] < sizes[0]


def test_tiling_multiplicity_is_one(tri_cloud):
    h = tiling_multiplicity_sample(tri_cloud, samples=1500)
    assert h.mode == 1 and h.fraction(1) > 0.8
    doubled = tiling_multiplicity_sample(tri_cloud, samples=1500, copies=2)
    assert doubled.mode == 2 and doubled.fraction(1) == 0


def test_domain_exchange_orbit(tri_cloud, tribonacci_word):
    rep = domain_exchange_orbit(tri_cloud, np.zeros(2), 1000)
    assert rep.labels == tribonacci_word[:1000]


def test_domain_exchange_leaves_cloud(tri_cloud):
    with pytest.raises(AmbiguousMembership):
        domain_exchange_orbit(tri_cloud, np.array([50.0, 50.0]), 3)


def test_torus_coding(tri_cloud, tribonacci_word):
    rep = natural_coding_crosscheck_torus(tri_cloud, tribonacci_word, 1500)
    assert rep.full


def test_interval_coding(fibonacci_word):
    rep = natural_coding_crosscheck_interval(fibonacci_word, steps=3000)
    assert rep.full


def test_interval_coding_detects_wrong_breakpoint(fibonacci_word):
    rep = natural_coding_crosscheck_interval(fibonacci_word, breakpoint=Fraction(3, 5), steps=3000)
    assert not rep.full


def test_representation_point_shrinks(tri_cloud):
    word = limit_sequences(tri_cloud_directive())[0].prefix(20_001)
    radii = [representation_point(word[:n], tri_cloud, word).radius for n in (0, 1, 3, 8)]
    assert radii == sorted(radii, reverse=True) and radii[-1] < 0.5 * radii[0]


def tri_cloud_directive():
    return parse_directive("tribonacci")


def test_subtiles_are_bounded_remainder_sets(tri_cloud, tribonacci_directive):
    u, _, _ = generalized_right_eigenvector(tribonacci_directive)
    for i in (1, 2, 3):
        track = bounded_remainder_probe(subtile_visits(tri_cloud, i, 5000), frequency=float(u[i - 1]))
        assert track.maximum < 1.5


def test_disc_is_not_bounded_remainder(tri_cloud):
    f = tri_cloud.frame
    B = f.lattice_basis()
    N = 10 ** 6
    pts = np.arange(N)[:, None] * f.translation(1)
    coef = np.linalg.solve(B.T, pts.T).T
    p = (coef - np.floor(coef)) @ B
    r = 0.3
    vis = np.linalg.norm(p - 0.5 * B.sum(axis=0), axis=1) < r
    track = bounded_remainder_probe(vis, frequency=np.pi * r * r / abs(np.linalg.det(B)))
    early = np.abs(track.discrepancy[track.n <= 1000]).max()
    assert track.maximum > 5 * early


def test_remainder_probe_on_exact_intervals():
    alpha = (5 ** 0.5 - 1) / 2
    track = bounded_remainder_probe(interval_visits(alpha, 0, alpha, 10 ** 5), frequency=alpha)
    assert track.maximum < 1.01
