import math
import random
from fractions import Fraction

import numpy as np
import pytest

from rauzylab.cfalgo import (ADDITIVE, BRUN, BRUN_CASE_TO_MATRIX, additive_digits, brun_cone_diameters,
                             brun_linear_orbit, brun_projective_orbit, brun_projective_step, cf_expand, cf_value,
                             expand, farey_step, gauss_step, jacobian_determinant, natural_extension_digit,
                             natural_extension_inverse, natural_extension_step, natural_extension_step_swapped,
                             sturmian_keys_from_digits)
from rauzylab.exact import QuadraticNumber, golden_inverse


def test_farey_and_gauss_examples():
    assert farey_step(Fraction(1, 2)) == 1
    assert farey_step(Fraction(2, 3)) == Fraction(1, 2)
    assert gauss_step(Fraction(2, 5)) == (2, Fraction(1, 2))
    with pytest.raises(ZeroDivisionError):
        gauss_step(0)


def test_golden_digits_are_all_ones():
    assert cf_expand(golden_inverse(), 20).digits == (1,) * 20


def test_sqrt2_digits_are_all_twos():
    assert cf_expand(QuadraticNumber(-1, 1, 2), 30).digits == (2,) * 30


def test_float_expansion_stops_when_uncertain():
    res = cf_expand((math.sqrt(5) - 1) / 2, 200)
    assert not res.terminated and res.uncertain_from is not None
    assert 20 <= len(res.digits) < 60 and set(res.digits) == {1}


def test_rational_roundtrip():
    rng = random.Random(7)
    for _ in range(50):
        q = rng.randint(2, 10 ** 9)
        x = Fraction(rng.randint(1, q), q)
        res = cf_expand(x, 200)
        assert res.terminated
        assert cf_value(res.digits) == x


def test_additive_runs_match_digits():
    rng = random.Random(3)
    for _ in range(100):
        D = rng.choice([2, 3, 5, 6, 7, 10, 11, 13])
        root = math.sqrt(D)
        x = QuadraticNumber(Fraction(-math.floor(root)), Fraction(1), D)
        if not 0 < float(x) < 1:
            continue
        assert additive_digits(x, 15) == list(cf_expand(x, 15).digits)


def test_expansion_reconstructs_vector():
    exp = expand(BRUN, (3, 5, 11))
    assert exp.reconstruct(0) == (3, 5, 11)
    for n in range(len(exp.branches) + 1):
        assert exp.reconstruct(n) == (3, 5, 11)
    exp2 = expand(ADDITIVE, (Fraction(1), Fraction(5, 8)))
    assert exp2.reconstruct() == (1, Fraction(5, 8))


def test_brun_case_matrix_mapping():
    # x2 <= 1/2: the largest coordinate drops below the middle one after one step
    case, _ = brun_projective_step(Fraction(1, 10), Fraction(1, 5))
    assert case == 1 and brun_linear_orbit(Fraction(1, 10), Fraction(1, 5), 1) == [BRUN_CASE_TO_MATRIX[1]]


def test_brun_orbits_agree_on_random_rationals():
    rng = np.random.default_rng(11)
    for _ in range(100):
        a, b = sorted(Fraction(int(v), 2 ** 64) for v in rng.integers(1, 2 ** 62, size=2))
        proj = [BRUN_CASE_TO_MATRIX[c] for c in brun_projective_orbit(a, b, 50)]
        assert proj == brun_linear_orbit(a, b, 50)


def test_brun_cone_contracts():
    rng = np.random.default_rng(2)
    a, b = sorted(Fraction(int.from_bytes(rng.bytes(32), "big"), 2 ** 256) for _ in range(2))
    diam = brun_cone_diameters(a, b, 200)
    assert diam[-1] < 1e-6
    assert diam[-1] <= diam[10]


def test_sturmian_keys():
    assert sturmian_keys_from_digits([2, 1, 3]) == [1, 1, 2, 1, 1, 1]


def test_natural_extension_roundtrip_and_area():
    rng = np.random.default_rng(5)
    for a, d in rng.random((200, 2)) * 0.98 + 0.01:
        a1, d1 = natural_extension_step(a, d)
        back = natural_extension_inverse(a1, d1, natural_extension_digit(a))
        assert abs(back[0] - a) <= 1e-12 and abs(back[1] - d) <= 1e-12 * max(1, abs(d))
        assert abs(abs(jacobian_determinant(natural_extension_step, a, d)) - 1) < 1e-6
        assert natural_extension_step_swapped(a, d) == (a1, d1)


def test_jacobian_near_a_digit_jump():
    a, d = 0.5 + 1e-6, 0.3
    det = jacobian_determinant(natural_extension_step, a, d, branch=lambda a, d: natural_extension_digit(a))
    assert abs(det - 1) < 1e-6
