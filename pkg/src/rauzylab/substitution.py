"""Substitutions (nonerasing monoid morphisms), incidence matrices and the
built-in families."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from . import matrices as mx
from .words import WordLike, as_bytes, parse_word, render


@dataclass(frozen=True)
class Substitution:
    """images[i-1] is the image of letter i, as bytes."""

    images: tuple[bytes, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        d = len(self.images)
        if d == 0:
            raise ValueError("substitution needs at least one letter")
        for i, img in enumerate(self.images, start=1):
            if not img:
                raise ValueError(f"image of letter {i} is empty (erasing)")
            if min(img) < 1 or max(img) > d:
                raise ValueError(f"image of letter {i} leaves the alphabet 1..{d}")
        object.__setattr__(self, "_table", [b""] + list(self.images))

    @classmethod
    def from_images(cls, images, name: str = "") -> "Substitution":
        return cls(tuple(as_bytes(w) for w in images), name)

    @classmethod
    def parse(cls, text: str, name: str = "") -> "Substitution":
        """Parse "1->12,2->13,3->1"."""
        parts = {}
        for item in text.split(","):
            if "->" not in item:
                raise ValueError(f"bad rule {item!r}")
            lhs, rhs = item.split("->")
            parts[parse_word(lhs)[0]] = parse_word(rhs)
        d = len(parts)
        if sorted(parts) != list(range(1, d + 1)):
            raise ValueError("rules must cover letters 1..d exactly once")
        return cls(tuple(parts[i] for i in range(1, d + 1)), name)

    @property
    def d(self) -> int:
        return len(self.images)

    def __str__(self):
        return ",".join(f"{render(bytes([i]))}->{render(img)}"
                        for i, img in enumerate(self.images, start=1))

    def __call__(self, w: WordLike) -> bytes:
        return self.apply(w)

    def apply(self, w: WordLike) -> bytes:
        b = as_bytes(w)
        if b and max(b) > self.d:
            raise ValueError(f"word uses letters outside 1..{self.d}")
        table = self._table
        return b"".join([table[c] for c in b])

    def image(self, letter: int) -> bytes:
        return self.images[letter - 1]

    def compose(self, other: "Substitution") -> "Substitution":
        """self o other: letter i maps to self(other(i))."""
        if other.d != self.d:
            raise ValueError("alphabet mismatch")
        name = f"{self.name}{other.name}" if self.name and other.name else ""
        return Substitution(tuple(self.apply(img) for img in other.images), name)

    def __mul__(self, other: "Substitution") -> "Substitution":
        return self.compose(other)

    def power(self, k: int) -> "Substitution":
        out = identity_substitution(self.d)
        for _ in range(k):
            out = out.compose(self)
        return out

    @cached_property
    def incidence(self) -> mx.IntMatrix:
        """m_ij = |sigma(j)|_i."""
        d = self.d
        cols = [[img.count(i) for i in range(1, d + 1)] for img in self.images]
        return mx.transpose(mx.as_matrix(cols))

    @cached_property
    def is_unimodular(self) -> bool:
        return abs(mx.determinant(self.incidence)) == 1

    @cached_property
    def inverse_incidence(self) -> mx.IntMatrix:
        return mx.integer_inverse(self.incidence)


def identity_substitution(d: int) -> Substitution:
    return Substitution(tuple(bytes([i]) for i in range(1, d + 1)), "id")


def _family(rules: dict[int, str], prefix: str) -> dict[int, Substitution]:
    return {k: Substitution.parse(v, f"{prefix}{k}") for k, v in rules.items()}


FAMILIES = {
    "sturmian": {1: "1->1,2->21", 2: "1->12,2->2"},
    "arnoux_rauzy": {1: "1->1,2->12,3->13", 2: "1->21,2->2,3->23", 3: "1->31,2->32,3->3"},
    "brun": {1: "1->3,2->1,3->23", 2: "1->1,2->3,3->23", 3: "1->1,2->23,3->3"},
    "tribonacci": {1: "1->12,2->13,3->1"},
}
ALIASES = {"ar": "arnoux_rauzy", "arnoux-rauzy": "arnoux_rauzy", "tribo": "tribonacci"}
_PREFIX = {"sturmian": "s", "arnoux_rauzy": "a", "brun": "b", "tribonacci": "t"}


def builtin_family(name: str) -> dict[int, Substitution]:
    """The named family as {index: substitution}."""
    key = ALIASES.get(name.lower(), name.lower())
    if key not in FAMILIES:
        raise KeyError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    return _family(FAMILIES[key], _PREFIX[key])


def tribonacci() -> Substitution:
    return builtin_family("tribonacci")[1]


def fibonacci_variant() -> Substitution:
    """sigma_1 o sigma_2 from the Sturmian family: 1->121, 2->21."""
    s = builtin_family("sturmian")
    return s[1].compose(s[2])
