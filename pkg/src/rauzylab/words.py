"""Finite and infinite words over the alphabet {1, ..., d}.

Words are stored as ``bytes`` whose byte values are the letters. That keeps
slicing, hashing and factor enumeration cheap at the 10^5 scale.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

import numpy as np

GLYPHS = "123456789abcdefghijklmnopqrstuvwxyz"


class InsufficientData(ValueError):
    """Raised when a prefix is too short for the requested computation."""


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be at least 1")

    @property
    def letters(self) -> range:
        return range(1, self.size + 1)


def glyph(letter: int) -> str:
    return GLYPHS[letter - 1]


def render(w: "WordLike") -> str:
    return "".join(GLYPHS[c - 1] for c in as_bytes(w))


def parse_word(text: str) -> bytes:
    try:
        return bytes(GLYPHS.index(ch) + 1 for ch in text.strip())
    except ValueError:
        raise ValueError(f"invalid letter in word {text!r}") from None


@dataclass(frozen=True)
class Word:
    """A finite word with an explicit alphabet. Immutable."""

    letters: bytes
    alphabet: Alphabet

    def __post_init__(self):
        if self.letters and (min(self.letters) < 1 or max(self.letters) > self.alphabet.size):
            raise ValueError(f"letters outside 1..{self.alphabet.size}")

    @classmethod
    def from_string(cls, text: str, d: int | None = None) -> "Word":
        b = parse_word(text)
        return cls(b, Alphabet(d if d is not None else max(b, default=1)))

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return render(self.letters)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return Word(self.letters[key], self.alphabet)
        return self.letters[key]


WordLike = Union[bytes, bytearray, Word, str, Iterable[int]]


def as_bytes(w: WordLike) -> bytes:
    if isinstance(w, bytes):
        return w
    if isinstance(w, Word):
        return w.letters
    if isinstance(w, str):
        return parse_word(w)
    return bytes(w)


def abelianize(w: WordLike, d: int) -> tuple[int, ...]:
    """Letter counts (|w|_1, ..., |w|_d)."""
    b = as_bytes(w)
    if not b:
        return (0,) * d
    counts = np.bincount(np.frombuffer(b, dtype=np.uint8), minlength=d + 1)
    if len(counts) > d + 1:
        raise ValueError(f"word uses letters beyond {d}")
    return tuple(int(c) for c in counts[1:])


def format_vector(v: Iterable[int]) -> str:
    return ",".join(str(int(x)) for x in v)


def factors(w: WordLike, n: int) -> set[bytes]:
    """All distinct factors of length n of the given (finite) prefix."""
    b = as_bytes(w)
    if n < 0:
        raise ValueError("length must be nonnegative")
    if n > len(b):
        raise InsufficientData(f"prefix of length {len(b)} has no factors of length {n}")
    return {b[k:k + n] for k in range(len(b) - n + 1)}


def count_factors(w: WordLike, n: int) -> int:
    """Number of distinct length-n factors; vectorised version of len(factors)."""
    b = as_bytes(w)
    if n > len(b):
        raise InsufficientData(f"prefix of length {len(b)} has no factors of length {n}")
    if n == 0:
        return 1
    arr = np.frombuffer(b, dtype=np.uint8)
    windows = np.lib.stride_tricks.sliding_window_view(arr, n)
    packed = np.ascontiguousarray(windows).view(np.dtype((np.void, n)))
    return int(np.unique(packed).size)


@dataclass(frozen=True)
class ObservedComplexity:
    n: int
    count: int
    horizon: int


def complexity(w: "WordLike | InfiniteWordStream", n: int, horizon: int) -> ObservedComplexity:
    """Observed number of length-n factors in the first `horizon` letters.

    This is a lower bound for the complexity of the infinite word.
    """
    prefix = w.prefix(horizon) if isinstance(w, InfiniteWordStream) else as_bytes(w)[:horizon]
    return ObservedComplexity(n, count_factors(prefix, n), len(prefix))


@dataclass(frozen=True)
class BalanceVerdict:
    C: int
    horizon: int
    max_length: int
    witness: tuple[bytes, bytes, int] | None = None

    @property
    def balanced(self) -> bool:
        return self.witness is None


def balance_check(prefix: WordLike, C: int, d: int | None = None,
                  max_length: int | None = None) -> BalanceVerdict:
    """Look for equal-length factors u, v with |u|_a - |v|_a > C.

    Window lengths up to `max_length` (default: the whole prefix) are scanned,
    shortest first, so a returned witness is of minimal length.
    """
    b = as_bytes(prefix)
    L = len(b)
    if d is None:
        d = max(b, default=1)
    max_length = L if max_length is None else min(max_length, L)
    arr = np.frombuffer(b, dtype=np.uint8)
    cums = [np.concatenate(([0], np.cumsum(arr == a, dtype=np.int64))) for a in range(1, d + 1)]
    for n in range(1, max_length + 1):
        for a, cs in enumerate(cums, start=1):
            counts = cs[n:] - cs[:-n]
            hi, lo = int(counts.argmax()), int(counts.argmin())
            if counts[hi] - counts[lo] > C:
                return BalanceVerdict(C, L, max_length, (b[hi:hi + n], b[lo:lo + n], a))
    return BalanceVerdict(C, L, max_length, None)


class InfiniteWordStream:
    """Lazily extended prefix of an infinite word.

    `producer(k)` must return a prefix of length at least k (longer is fine)
    and must be consistent with everything it returned before. The full
    produced prefix is cached; memory is the caller's concern.
    """

    def __init__(self, producer: Callable[[int], bytes], d: int):
        self._producer = producer
        self._cache = b""
        self._lock = threading.Lock()
        self.d = d

    def prefix(self, n: int) -> bytes:
        with self._lock:
            if len(self._cache) < n:
                new = self._producer(n)
                if len(new) < n:
                    raise InsufficientData(f"producer returned {len(new)} < {n} letters")
                if not new.startswith(self._cache):
                    raise RuntimeError("producer changed an already produced prefix")
                self._cache = new
            return self._cache[:n]

    @property
    def cached(self) -> bytes:
        return self._cache

    def __getitem__(self, k: int) -> int:
        return self.prefix(k + 1)[k]
