"""Small exact integer matrix helpers and the Hilbert projective metric.

Matrices are tuples of row tuples of Python ints so products of long
directive windows never overflow.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

IntMatrix = tuple[tuple[int, ...], ...]


def as_matrix(rows) -> IntMatrix:
    return tuple(tuple(int(v) for v in row) for row in rows)


def identity(d: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def matmul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    cols = list(zip(*B))
    return tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols) for row in A)


def matvec(A: IntMatrix, v: Sequence) -> tuple:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in A)


def transpose(A: IntMatrix) -> IntMatrix:
    return tuple(zip(*A))


def product(mats: Sequence[IntMatrix], d: int) -> IntMatrix:
    out = identity(d)
    for M in mats:
        out = matmul(out, M)
    return out


def determinant(A: IntMatrix) -> int:
    return int(sympy.Matrix(A).det())


@lru_cache(maxsize=256)
def integer_inverse(A: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular integer matrix, exactly."""
    det = determinant(A)
    if abs(det) != 1:
        raise ValueError(f"matrix is not unimodular (det={det})")
    inv = sympy.Matrix(A).inv()
    return as_matrix(inv.tolist())


def is_positive(A: IntMatrix) -> bool:
    return all(v > 0 for row in A for v in row)


def charpoly(A: IntMatrix) -> list[int]:
    """Coefficients of det(xI - A), leading coefficient first."""
    x = sympy.Symbol("x")
    return [int(c) for c in sympy.Matrix(A).charpoly(x).all_coeffs()]


def is_irreducible_over_q(coeffs: Sequence[int]) -> bool:
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(coeffs), x, domain="ZZ")
    if poly.degree() <= 0:
        return False
    _, factors = sympy.factor_list(poly.as_expr(), x)
    return len(factors) == 1 and factors[0][1] == 1


def to_float(A: IntMatrix) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in A])


def _log_ratio(p: int, q: int) -> float:
    """log(p/q) for positive ints, accurate even when p/q is near 1."""
    if p == q:
        return 0.0
    r = Fraction(p - q, q)
    if abs(r) < 0.5:
        return math.log1p(float(r))
    return math.log(p) - math.log(q)


def hilbert_distance(v: Sequence, w: Sequence) -> float:
    """max_{i,j} log(v_i w_j / (v_j w_i)) for positive vectors.

    Integer inputs are handled exactly up to the final logarithm.
    """
    if all(isinstance(a, int) for a in list(v) + list(w)):
        # v_i w_j / (v_j w_i) maximal: maximize v_i/w_i, minimize v_j/w_j
        hi = max(range(len(v)), key=lambda i: Fraction(v[i], w[i]))
        lo = min(range(len(v)), key=lambda i: Fraction(v[i], w[i]))
        return _log_ratio(v[hi] * w[lo], v[lo] * w[hi])
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(v <= 0) or np.any(w <= 0):
        return math.inf
    r = np.log(v) - np.log(w)
    return float(r.max() - r.min())


def hilbert_diameter(A) -> float:
    """Hilbert-metric diameter of the column vectors of A (inf if any column
    has a zero entry)."""
    if isinstance(A, np.ndarray):
        cols = [A[:, j] for j in range(A.shape[1])]
        if np.any(A <= 0):
            return math.inf
    else:
        if not is_positive(A):
            return math.inf
        cols = list(zip(*A))
    best = 0.0
    for a in range(len(cols)):
        for b in range(a + 1, len(cols)):
            best = max(best, hilbert_distance(cols[a], cols[b]))
    return best
