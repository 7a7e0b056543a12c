"""Exact arithmetic in real quadratic fields Q(sqrt(D))."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Union[int, Fraction]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


@total_ordering
class QuadraticNumber:
    """A number a + b*sqrt(D) with rational a, b and squarefree-ish D > 1.

    Comparisons and floor are exact, which is what makes rotation codings
    reliable when an orbit lands exactly on an interval endpoint.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a: Rational, b: Rational = 0, D: int = 5):
        if D <= 1 or math.isqrt(D) ** 2 == D:
            raise ValueError("D must be a positive non-square")
        self.a = _frac(a)
        self.b = _frac(b)
        self.D = D

    def _coerce(self, other) -> "QuadraticNumber":
        if isinstance(other, QuadraticNumber):
            if other.D != self.D:
                raise ValueError("mixing different quadratic fields")
            return other
        return QuadraticNumber(_frac(other), 0, self.D)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.a * o.a + self.b * o.b * self.D,
                               self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def __truediv__(self, other):
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        num = self * o.conjugate()
        return QuadraticNumber(num.a / n, num.b / n, self.D)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 D
        diff = self.a * self.a - self.b * self.b * self.D
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def __eq__(self, other):
        try:
            return (self - other).sign() == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.a, self.b, self.D))

    def __floor__(self) -> int:
        guess = math.floor(float(self))
        # float can be off by one near integers; fix exactly
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def frac(self) -> "QuadraticNumber":
        return self - math.floor(self)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.D)

    def __repr__(self):
        return f"QuadraticNumber({self.a}, {self.b}, D={self.D})"


def golden_inverse() -> QuadraticNumber:
    """phi^-1 = (sqrt 5 - 1)/2."""
    return QuadraticNumber(Fraction(-1, 2), Fraction(1, 2), 5)
