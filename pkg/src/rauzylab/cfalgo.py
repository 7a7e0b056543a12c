"""Classical and multidimensional continued fraction algorithms.

Exact inputs (int, Fraction, QuadraticNumber) are processed exactly; float
inputs carry a running error bound so that digits which cannot be trusted
are reported instead of silently produced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import matrices as mx
from .exact import QuadraticNumber
from .sadic import DirectiveSequence
from .substitution import Substitution

EXACT_TYPES = (int, Fraction, QuadraticNumber)


def _is_exact(x) -> bool:
    return isinstance(x, EXACT_TYPES)


# ---------------------------------------------------------------- d = 2

def farey_step(x):
    """Projective additive map: (1-x)/x if x > 1/2, else x/(1-x)."""
    if x < 0 or x > 1:
        raise ValueError("x must lie in [0, 1]")
    half = Fraction(1, 2) if _is_exact(x) else 0.5
    if x > half:
        return (1 - x) / x
    return x / (1 - x)


def gauss_step(x):
    """(floor(1/x), {1/x}) for 0 < x <= 1."""
    if x == 0:
        raise ZeroDivisionError("x = 0: the expansion has terminated")
    if x < 0 or x > 1:
        raise ValueError("x must lie in (0, 1]")
    inv = 1 / x
    a = math.floor(inv)
    return a, inv - a


@dataclass(frozen=True)
class CFDigits:
    digits: tuple[int, ...]
    terminated: bool       # the input was rational and the expansion ended
    uncertain_from: int | None = None   # first index whose digit float error could change


def cf_expand(x, depth: int = 64) -> CFDigits:
    """Multiplicative continued fraction digits [a0, a1, ...] of x in (0,1)."""
    if not 0 < x <= 1:
        raise ValueError("x must lie in (0, 1]")
    digits = []
    exact = _is_exact(x)
    err = 0.0 if exact else abs(float(x)) * 2.0 ** -52
    for n in range(depth):
        if x == 0:
            return CFDigits(tuple(digits), True)
        if not exact:
            inv = 1.0 / x
            # 1/x moves by about err/x^2; a digit is trustworthy only if the
            # whole error interval has the same floor
            e_inv = err / (x * x) + abs(inv) * 2.0 ** -52
            if math.floor(inv - e_inv) != math.floor(inv + e_inv):
                return CFDigits(tuple(digits), False, n)
            a, x = gauss_step(x)
            err = e_inv + 2.0 ** -52
        else:
            a, x = gauss_step(x)
        digits.append(a)
    return CFDigits(tuple(digits), x == 0)


def cf_value(digits: Sequence[int]) -> Fraction:
    """Exact value of the finite expansion 1/(a0 + 1/(a1 + ...))."""
    x = Fraction(0)
    for a in reversed(digits):
        x = 1 / (a + x)
    return x


# -------------------------------------------------------- generic algorithms

@dataclass(frozen=True)
class CFAlgorithm:
    """partition(v) -> branch index i for a vector v in the domain; the step
    is v -> M_i^{-1} v (followed by `normalize`)."""

    name: str
    matrices: dict[int, mx.IntMatrix]
    partition: Callable[[Sequence], int]
    in_domain: Callable[[Sequence], bool]
    normalize: Callable[[Sequence], tuple] = field(default=lambda v: tuple(v))

    @property
    def d(self) -> int:
        return len(next(iter(self.matrices.values())))


def _additive_partition(v):
    a, b = v
    return 1 if a > b else 2


ADDITIVE = CFAlgorithm(
    "additive",
    {1: ((1, 1), (0, 1)), 2: ((1, 0), (1, 1))},
    _additive_partition,
    lambda v: len(v) == 2 and v[0] >= 0 and v[1] >= 0 and (v[0] != 0 or v[1] != 0),
)


def _brun_partition(v):
    """Sorted v = (w1 <= w2 <= w3). Ties resolve to the first matching case:
    M3 when w3 - w2 >= w2, M2 when w3 - w2 >= w1, otherwise M1."""
    w1, w2, w3 = v
    r = w3 - w2
    if r >= w2:
        return 3
    if r >= w1:
        return 2
    return 1


BRUN = CFAlgorithm(
    "brun",
    {1: ((0, 1, 0), (0, 0, 1), (1, 0, 1)),
     2: ((1, 0, 0), (0, 0, 1), (0, 1, 1)),
     3: ((1, 0, 0), (0, 1, 0), (0, 1, 1))},
    _brun_partition,
    lambda v: len(v) == 3 and 0 <= v[0] <= v[1] <= v[2] and v[2] > 0,
)

ALGORITHMS = {"additive": ADDITIVE, "brun": BRUN}


def _apply_inverse(M: mx.IntMatrix, v: Sequence):
    inv = mx.integer_inverse(M)
    return tuple(sum(c * x for c, x in zip(row, v)) for row in inv)


def linear_step(alg: CFAlgorithm, v: Sequence) -> tuple[int, tuple]:
    """(branch i, M_i^{-1} v). The vector is kept unnormalized, which is what
    makes exact integer and rational runs possible."""
    if not alg.in_domain(v):
        raise ValueError(f"{v!r} is outside the domain of {alg.name}")
    i = alg.partition(v)
    return i, _apply_inverse(alg.matrices[i], v)


@dataclass
class Expansion:
    algorithm: str
    start: tuple
    branches: list[int]
    residuals: list[tuple]      # residual after each step (unnormalized)
    d: int

    def matrix(self, n: int | None = None) -> mx.IntMatrix:
        alg = ALGORITHMS[self.algorithm]
        n = len(self.branches) if n is None else n
        return mx.product([alg.matrices[i] for i in self.branches[:n]], self.d)

    def reconstruct(self, n: int | None = None) -> tuple:
        n = len(self.branches) if n is None else n
        res = self.start if n == 0 else self.residuals[n - 1]
        M = self.matrix(n)
        return tuple(sum(c * x for c, x in zip(row, res)) for row in M)


def expand(alg: CFAlgorithm, v: Sequence, depth: int = 4096) -> Expansion:
    """Iterate the linear map; stops when the vector leaves the domain
    (e.g. a zero coordinate for rational input)."""
    v = tuple(v)
    exp = Expansion(alg.name, v, [], [], alg.d)
    for _ in range(depth):
        if not alg.in_domain(v) or any(x == 0 for x in v):
            break
        i, v = linear_step(alg, v)
        exp.branches.append(i)
        exp.residuals.append(v)
    return exp


def run_lengths(branches: Sequence[int]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for b in branches:
        if out and out[-1][0] == b:
            out[-1] = (b, out[-1][1] + 1)
        else:
            out.append((b, 1))
    return out


def additive_digits(x, n_digits: int) -> list[int]:
    """Group the additive expansion of (1, x) into runs and return the run
    lengths; these coincide with the multiplicative digits of x."""
    v = (1 if _is_exact(x) else 1.0, x)
    branches: list[int] = []
    runs: list[tuple[int, int]] = []
    while True:
        if v[0] == 0 or v[1] == 0:
            break
        i, v = linear_step(ADDITIVE, v)
        branches.append(i)
        runs = run_lengths(branches)
        if len(runs) > n_digits:
            break
    return [r for _, r in runs[:n_digits]]


# ---------------------------------------------------------------- Brun

# The projective map is written with cases 1, 2, 3 in the order its formula
# lists them; case 1 divides by (1 - x2) and corresponds to M3, case 3 to M1.
BRUN_CASE_TO_MATRIX = {1: 3, 2: 2, 3: 1}


def brun_projective_step(x1, x2) -> tuple[int, tuple]:
    """One step of the projective Brun map on 0 <= x1 <= x2 <= 1.

    Returns (case, (x1', x2')). Boundary points go to the first case whose
    condition holds.
    """
    if not (0 <= x1 <= x2 <= 1):
        raise ValueError(f"({x1}, {x2}) is outside 0 <= x1 <= x2 <= 1")
    half = Fraction(1, 2) if _is_exact(x2) else 0.5
    if x2 <= half:
        return 1, (x1 / (1 - x2), x2 / (1 - x2))
    if x2 <= 1 - x1:
        return 2, (x1 / x2, (1 - x2) / x2)
    return 3, ((1 - x2) / x2, x1 / x2)


def brun_lift(x1, x2) -> tuple:
    """The vector (x1, x2, 1), scaled to integers when the input is rational."""
    if isinstance(x1, (int, Fraction)) and isinstance(x2, (int, Fraction)):
        x1, x2 = Fraction(x1), Fraction(x2)
        den = math.lcm(x1.denominator, x2.denominator)
        return (int(x1 * den), int(x2 * den), den)
    return (x1, x2, 1 if _is_exact(x1) else 1.0)


def _brun_sorted_step(w1, w2, w3):
    r = w3 - w2
    if r >= w2:
        return 3, (w1, w2, r)
    if r >= w1:
        return 2, (w1, r, w2)
    return 1, (r, w1, w2)


def brun_projective_orbit(x1, x2, steps: int) -> list[int]:
    out = []
    for _ in range(steps):
        case, (x1, x2) = brun_projective_step(x1, x2)
        out.append(case)
    return out


def brun_linear_orbit(x1, x2, steps: int) -> list[int]:
    """Matrix indices of the linear Brun map on the lifted vector."""
    v = brun_lift(x1, x2)
    out = []
    for _ in range(steps):
        i, v = _brun_sorted_step(*v)
        out.append(i)
    return out


def brun_cone_diameters(x1, x2, steps: int) -> list[float]:
    """Hilbert diameter of the columns of M_[0,n) along the Brun orbit of
    (x1, x2), for n = 1..steps. Branches are exact for rational input; the
    product is accumulated in floats with renormalized columns."""
    mats = {i: mx.to_float(M) for i, M in BRUN.matrices.items()}
    P = np.eye(3)
    out = []
    for i in brun_linear_orbit(x1, x2, steps):
        P = P @ mats[i]
        P /= P.sum(axis=0, keepdims=True)
        out.append(mx.hilbert_diameter(P))
    return out


# ------------------------------------------------------- to substitutions

class FamilyMismatch(ValueError):
    pass


def expansion_to_substitutions(exp: Expansion, family: dict[int, Substitution]) -> DirectiveSequence:
    """Finite directive sequence whose incidence matrices are the branch
    matrices of the expansion."""
    alg = ALGORITHMS[exp.algorithm]
    for i, M in alg.matrices.items():
        if i not in family or family[i].incidence != M:
            raise FamilyMismatch(f"family has no substitution with matrix {M} at index {i}")
    return DirectiveSequence(family, prefix=list(exp.branches), label=f"{exp.algorithm}-expansion")


def sturmian_keys_from_digits(digits: Sequence[int]) -> list[int]:
    """sigma_1^{a0} sigma_2^{a1} ... as a list of family indices."""
    keys: list[int] = []
    for t, a in enumerate(digits):
        keys += [1 + t % 2] * a
    return keys


# ------------------------------------------------------- natural extension

def natural_extension_step(a, d) -> tuple:
    """(a, d) -> ({1/a}, a - d a^2): the Gauss map extended to pairs of
    rectangles, for the configuration whose wider rectangle is the second
    one."""
    if a == 0:
        raise ZeroDivisionError("a = 0")
    inv = 1 / a
    return inv - math.floor(inv), a - d * a * a


def natural_extension_digit(a) -> int:
    return math.floor(1 / a)


def natural_extension_inverse(a1, d1, digit: int) -> tuple:
    """Undo one step given the digit floor(1/a) of the preimage."""
    a = 1 / (digit + a1)
    return a, (a - d1) / (a * a)


def natural_extension_step_swapped(b, c) -> tuple:
    """Same map for the mirror configuration (first rectangle widest); the
    roles of the two rectangles are exchanged."""
    return natural_extension_step(b, c)


def jacobian_determinant(f: Callable, a: float, d: float, rel: float = 1e-4,
                         branch: Callable | None = None) -> float:
    """Central finite-difference Jacobian determinant of f at (a, d), with
    steps proportional to the coordinates.

    For piecewise maps pass `branch(a, d)`; the steps are halved until every
    stencil point lies on the branch of (a, d).
    """
    ha, hd = rel * abs(a) or rel, rel * abs(d) or rel
    if branch is not None:
        b0 = branch(a, d)
        for _ in range(60):
            if all(branch(x, y) == b0 for x, y in ((a + ha, d), (a - ha, d), (a, d + hd), (a, d - hd))):
                break
            ha, hd = ha / 2, hd / 2
    fa1, fa0 = np.array(f(a + ha, d)), np.array(f(a - ha, d))
    fd1, fd0 = np.array(f(a, d + hd)), np.array(f(a, d - hd))
    ja = (fa1 - fa0) / (2 * ha)
    jd = (fd1 - fd0) / (2 * hd)
    return float(ja[0] * jd[1] - ja[1] * jd[0])
