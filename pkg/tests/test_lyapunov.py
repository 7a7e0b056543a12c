import numpy as np
import pytest

from rauzylab.lyapunov import (CocycleRun, ExponentEstimate, estimate_exponents, exact_log_eigenvalues,
                               pisot_verdict, wedge2)
from rauzylab.substitution import builtin_family, tribonacci


def test_wedge2_is_multiplicative():
    rng = np.random.default_rng(0)
    A, B = rng.normal(size=(2, 3, 3))
    assert np.allclose(wedge2(A @ B), wedge2(A) @ wedge2(B))
    assert np.isclose(np.linalg.det(wedge2(A)), np.linalg.det(A) ** 2)


def test_single_matrix_matches_eigenvalues():
    est = estimate_exponents(CocycleRun.from_family([tribonacci()], n=20_000, replicas=2))
    exact = exact_log_eigenvalues(tribonacci().incidence)
    assert abs(est.theta1 - exact[0]) < 1e-3
    assert abs(est.theta2 - exact[1]) < 1e-3
    assert est.degenerate


def test_transpose_gives_same_exponents():
    run = CocycleRun.from_family(builtin_family("brun"), n=3000, replicas=4, seed=1)
    a, b = estimate_exponents(run), estimate_exponents(run, transpose=True)
    assert abs(a.theta1 - b.theta1) < 0.01 and abs(a.theta2 - b.theta2) < 0.01


def test_identity_violates_pisot():
    est = estimate_exponents(CocycleRun([np.eye(3)], n=2000, replicas=4))
    assert est.theta1 == 0 and est.verdict == "violated"


def test_permutation_violates_pisot():
    P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], float)
    assert estimate_exponents(CocycleRun([P], n=2000, replicas=4)).verdict == "violated"


def test_short_runs_are_inconclusive():
    est = estimate_exponents(CocycleRun.from_family([tribonacci()], n=100, replicas=2))
    assert est.verdict == "inconclusive"


def test_verdict_rule():
    assert pisot_verdict(0.3, -0.1, 0.01, 0.01) == "satisfied"
    assert pisot_verdict(0.3, 0.1, 0.01, 0.01) == "violated"
    assert pisot_verdict(0.3, -0.01, 0.01, 0.01) == "inconclusive"


def test_seeding_is_reproducible():
    fam = builtin_family("arnoux_rauzy")
    a = estimate_exponents(CocycleRun.from_family(fam, n=1500, replicas=3, seed=9))
    b = estimate_exponents(CocycleRun.from_family(fam, n=1500, replicas=3, seed=9))
    assert np.array_equal(a.per_replica, b.per_replica)


def test_markov_measure_avoids_forbidden_moves():
    from rauzylab.lyapunov import _sample_keys
    T = np.ones((3, 3)) - np.eye(3)
    keys = _sample_keys(CocycleRun([np.eye(3)] * 3, n=500, replicas=2, transition=T))
    assert (keys[:, 1:] != keys[:, :-1]).all()


def test_json_has_verdict():
    est = estimate_exponents(CocycleRun.from_family([tribonacci()], n=1000, replicas=2))
    js = est.to_json()
    assert js["verdict"] == "satisfied" and "per_replica" not in js
