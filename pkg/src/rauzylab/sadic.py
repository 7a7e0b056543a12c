"""Directive sequences, limit sequences, languages, frequencies and the
hypothesis checks (primitivity, recurrence, irreducibility, balance)."""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import matrices as mx
from .substitution import Substitution, builtin_family, identity_substitution
from .words import (BalanceVerdict, InfiniteWordStream, InsufficientData, abelianize,
                    as_bytes, balance_check, factors, render)


class DirectiveError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class DirectiveSequence:
    """sigma_0, sigma_1, ... drawn from a finite family {key: substitution}.

    Exactly one of the following shapes:
      * periodic / eventually periodic: ``prefix`` then ``block`` repeated;
      * generated: keys produced by ``rule(rng, previous_key)`` from a seeded
        numpy Generator, cached so windows are repeatable;
      * finite: only ``prefix``; asking beyond it raises.
    """

    def __init__(self, family: dict[int, Substitution], *, prefix: Sequence[int] = (),
                 block: Sequence[int] = (), rule: Callable | None = None,
                 seed: int | None = None, label: str = ""):
        if not family:
            raise DirectiveError("empty family")
        ds = {s.d for s in family.values()}
        if len(ds) != 1:
            raise DirectiveError("family mixes alphabet sizes")
        for k in list(prefix) + list(block):
            if k not in family:
                raise DirectiveError(f"unknown substitution index {k}")
        if rule is not None and block:
            raise DirectiveError("generated directives have no periodic block")
        self.family = dict(family)
        self.prefix = tuple(prefix)
        self.block = tuple(block)
        self.rule = rule
        self.seed = seed
        self.label = label
        self.d = ds.pop()
        self._generated: list[int] = list(self.prefix)
        self._rng = np.random.default_rng(seed) if rule is not None else None
        self._lock = threading.RLock()
        self._cum: list[mx.IntMatrix] = [mx.identity(self.d)]

    @property
    def kind(self) -> str:
        if self.rule is not None:
            return "generated"
        if self.block:
            return "periodic" if not self.prefix else "eventually_periodic"
        return "finite"

    @classmethod
    def periodic(cls, family, block, label=""):
        if not block:
            raise DirectiveError("empty periodic block")
        return cls(family, block=block, label=label)

    @classmethod
    def constant(cls, sub: Substitution, label=""):
        return cls({1: sub}, block=(1,), label=label or sub.name)

    def is_finite(self) -> bool:
        return self.kind == "finite"

    def __len__(self):
        if not self.is_finite():
            raise TypeError("infinite directive sequence has no length")
        return len(self.prefix)

    def key(self, n: int) -> int:
        if self.rule is not None and n >= len(self._generated):
            with self._lock:
                return self._key_unlocked(n)
        return self._key_unlocked(n)

    def _key_unlocked(self, n: int) -> int:
        if n < 0:
            raise IndexError(n)
        if n < len(self.prefix):
            return self.prefix[n]
        if self.block:
            return self.block[(n - len(self.prefix)) % len(self.block)]
        if self.rule is None:
            raise IndexError(f"finite directive of length {len(self.prefix)} has no index {n}")
        while len(self._generated) <= n:
            prev = self._generated[-1] if self._generated else None
            self._generated.append(int(self.rule(self._rng, prev)))
        return self._generated[n]

    def keys(self, m: int, n: int) -> list[int]:
        return [self.key(k) for k in range(m, n)]

    def __getitem__(self, n: int) -> Substitution:
        return self.family[self.key(n)]

    def window(self, m: int, n: int) -> list[Substitution]:
        return [self[k] for k in range(m, n)]

    def matrix(self, m: int, n: int) -> mx.IntMatrix:
        """M_[m,n) = M_m M_{m+1} ... M_{n-1}, exact."""
        if m == 0:
            with self._lock:
                while len(self._cum) <= n:
                    k = len(self._cum) - 1
                    self._cum.append(mx.matmul(self._cum[-1], self.family[self._key_unlocked(k)].incidence))
                return self._cum[n]
        return mx.product([s.incidence for s in self.window(m, n)], self.d)

    def composite(self, m: int, n: int) -> Substitution:
        """sigma_[m,n) = sigma_m o ... o sigma_{n-1}."""
        out = identity_substitution(self.d)
        for s in self.window(m, n):
            out = out.compose(s)
        return out

    def apply_window(self, m: int, n: int, w) -> bytes:
        """sigma_[m,n)(w), applying sigma_{n-1} first."""
        b = as_bytes(w)
        for k in range(n - 1, m - 1, -1):
            b = self[k].apply(b)
        return b

    def describe(self) -> str:
        if self.label:
            return self.label
        if self.kind == "generated":
            return f"generated(seed={self.seed})"
        pre = ",".join(map(str, self.prefix))
        blk = ",".join(map(str, self.block))
        return f"{pre}({blk})^w" if blk else pre


# ----------------------------------------------------------------- parsing

def bernoulli_rule(keys: Sequence[int], weights: Sequence[float] | None = None):
    keys = list(keys)
    p = None if weights is None else np.asarray(weights, float) / np.sum(weights)

    def rule(rng, prev):
        return keys[int(rng.choice(len(keys), p=p))]
    return rule


def markov_rule(keys: Sequence[int], transition: np.ndarray | None = None):
    """Default chain: uniform over the keys different from the previous one."""
    keys = list(keys)
    k = len(keys)
    if transition is None:
        transition = (np.ones((k, k)) - np.eye(k)) / max(k - 1, 1) if k > 1 else np.ones((1, 1))
    transition = np.asarray(transition, float)
    transition = transition / transition.sum(axis=1, keepdims=True)

    def rule(rng, prev):
        row = np.full(k, 1.0 / k) if prev is None else transition[keys.index(prev)]
        return keys[int(rng.choice(k, p=row))]
    return rule


_BLOCK = re.compile(r"\(([^()]*)\)\s*\^\s*(?:w|ω|omega|inf)")


def _ints(text: str, spec: str, offset: int) -> list[int]:
    out = []
    for m in re.finditer(r"[^,\s]+", text):
        try:
            out.append(int(m.group()))
        except ValueError:
            raise ParseError(f"expected an integer, got {m.group()!r}", spec, offset + m.start()) from None
    return out


def _sturmian_keys(digits: Sequence[int], parity: int) -> list[int]:
    keys = []
    for t, a in enumerate(digits):
        if a < 1:
            raise DirectiveError("continued fraction digits must be positive")
        keys += [1 + (parity + t) % 2] * a
    return keys


def sturmian_directive(prefix_digits: Sequence[int], block_digits: Sequence[int]) -> DirectiveSequence:
    """sigma_1^{a0} sigma_2^{a1} sigma_1^{a2} ... with digits prefix then block
    repeated."""
    fam = builtin_family("sturmian")
    pre = _sturmian_keys(prefix_digits, 0)
    parity = len(prefix_digits) % 2
    blk_digits = list(block_digits) * (2 if len(block_digits) % 2 else 1)
    blk = _sturmian_keys(blk_digits, parity)
    return DirectiveSequence(fam, prefix=pre, block=blk)


def parse_directive(spec: str) -> DirectiveSequence:
    """Parse a directive description.

    Forms::

        tribonacci | fibonacci
        sturmian:1,1,1          continued fraction digits, repeated
        sturmian:2,(1,3)^w      digit prefix then periodic digits
        brun:(1,2,1,2)^w        periodic indices (also brun:1,2,1,2)
        ar:3,3(1,2,3)^w         eventually periodic
        ar:seed=42:markov       generated; also :bernoulli
        sub:1->12,2->13,3->1    a single substitution, iterated
    """
    text = spec.strip()
    if not text:
        raise ParseError("empty directive", spec, 0)
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    base = len(spec) - len(spec.lstrip()) + len(name) + 1
    if name in ("tribonacci", "tribo") and not rest:
        d = DirectiveSequence.constant(builtin_family("tribonacci")[1], "tribonacci")
        return d
    if name in ("fibonacci", "fibonacci_variant") and not rest:
        d = sturmian_directive([], [1])
        d.label = "fibonacci"
        return d
    if name == "sub":
        if not rest:
            raise ParseError("missing substitution rules", spec, base)
        try:
            subs = [Substitution.parse(r) for r in rest.split(";")]
        except ValueError as exc:
            raise ParseError(str(exc), spec, base) from None
        fam = {i: s for i, s in enumerate(subs, start=1)}
        return DirectiveSequence(fam, block=tuple(fam), label=text)
    try:
        fam = builtin_family(name)
    except KeyError:
        raise ParseError(f"unknown family {name!r}", spec, 0) from None
    if not rest.strip():
        raise ParseError("missing directive body", spec, base)
    if "seed=" in rest:
        opts = dict(seed=None, mode="bernoulli")
        for part in rest.split(":"):
            part = part.strip()
            if part.startswith("seed="):
                try:
                    opts["seed"] = int(part[5:])
                except ValueError:
                    raise ParseError("bad seed", spec, base + rest.index(part)) from None
            elif part in ("bernoulli", "markov"):
                opts["mode"] = part
            elif part:
                raise ParseError(f"unknown option {part!r}", spec, base + rest.index(part))
        keys = sorted(fam)
        rule = bernoulli_rule(keys) if opts["mode"] == "bernoulli" else markov_rule(keys)
        return DirectiveSequence(fam, rule=rule, seed=opts["seed"], label=text)
    m = _BLOCK.search(rest)
    if m:
        pre_txt = rest[:m.start()]
        if rest[m.end():].strip():
            raise ParseError("trailing text after periodic block", spec, base + m.end())
        pre = _ints(pre_txt, spec, base)
        blk = _ints(m.group(1), spec, base + m.start(1))
    else:
        pre, blk = [], _ints(rest, spec, base)
    if not blk:
        raise ParseError("empty periodic block", spec, base)
    if name == "sturmian":
        d = sturmian_directive(pre, blk)
    else:
        try:
            d = DirectiveSequence(fam, prefix=pre, block=blk)
        except DirectiveError as exc:
            raise ParseError(str(exc), spec, base) from None
    d.label = text
    return d


# ------------------------------------------------------- primitivity etc.

@dataclass
class PrimitivityReport:
    witnesses: dict[int, int | None]
    cap: int

    @property
    def ok(self) -> bool:
        return all(v is not None for v in self.witnesses.values())


def primitivity_check(directive: DirectiveSequence, horizon: int = 0, cap: int = 256) -> PrimitivityReport:
    """For each m <= horizon, the least n with M_[m,n) positive (n - m <= cap)."""
    d = directive.d
    out: dict[int, int | None] = {}
    for m in range(horizon + 1):
        P = np.eye(d, dtype=bool)
        found = None
        for n in range(m + 1, m + cap + 1):
            B = np.array(directive[n - 1].incidence, dtype=np.int64) > 0
            P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
            if P.all():
                found = n
                break
        out[m] = found
    return PrimitivityReport(out, cap)


def recurrence_check(directive: DirectiveSequence, block_length: int, horizon: int = 10_000) -> int | None:
    """Least n >= 1 (n <= horizon) with sigma_[n, n+l) equal to sigma_[0, l)."""
    if block_length < 1:
        raise ValueError("block length must be >= 1")
    target = directive.keys(0, block_length)
    for n in range(1, horizon + 1):
        try:
            if directive.keys(n, n + block_length) == target:
                return n
        except IndexError:
            return None
    return None


@dataclass(frozen=True)
class IrreducibilityVerdict:
    m: int
    l: int
    charpoly: tuple[int, ...]
    irreducible: bool


def algebraic_irreducibility_check(directive: DirectiveSequence, m: int = 0, span: int = 6) -> list[IrreducibilityVerdict]:
    """Exact irreducibility over Q of char(M_[m,l)) for l = m+1 .. m+span."""
    out = []
    M = mx.identity(directive.d)
    for l in range(m + 1, m + span + 1):
        M = mx.matmul(M, directive[l - 1].incidence)
        cp = mx.charpoly(M)
        out.append(IrreducibilityVerdict(m, l, tuple(cp), mx.is_irreducible_over_q(cp)))
    return out


class ConvergenceError(RuntimeError):
    pass


def generalized_right_eigenvector(directive: DirectiveSequence, eps: float = 1e-12,
                                  cap: int = 5000) -> tuple[np.ndarray, int, float]:
    """Direction of the nested cones M_[0,n) R^d_+, with the n at which the
    Hilbert diameter of the column images dropped below eps."""
    d = directive.d
    if d == 1:
        return np.ones(1), 0, 0.0
    diam = math.inf
    for n in range(1, cap + 1):
        M = directive.matrix(0, n)
        diam = mx.hilbert_diameter(M)
        if diam < eps:
            cols = np.array([[float(x) for x in col] for col in zip(*M)])
            cols = cols / cols.sum(axis=1, keepdims=True)
            u = cols.mean(axis=0)
            return u / u.sum(), n, diam
    raise ConvergenceError(f"Hilbert diameter still {diam:.3g} after {cap} steps")


# ------------------------------------------------------- limit sequences

def _first_letters(sub: Substitution) -> list[int]:
    return [img[0] for img in sub.images]


class LimitSequence:
    """A limit sequence given by an admissible chain of first letters.

    chain[n] = a_n satisfies a_n = first letter of sigma_n(a_{n+1}); the
    prefix sigma_[0,n)(a_n) grows with n. The chain is extended on demand,
    choosing the smallest letter that stays admissible `lookahead` levels
    further down.
    """

    def __init__(self, directive: DirectiveSequence, chain: Sequence[int], lookahead: int = 32):
        self.directive = directive
        self.chain = list(chain)
        self.lookahead = lookahead
        self._lock = threading.Lock()
        self.stream = InfiniteWordStream(lambda k: self._produce(0, k), directive.d)

    @property
    def first_letter(self) -> int:
        return self.chain[0]

    def _admissible(self, level: int) -> set[int]:
        """Letters at `level` reachable backwards from `lookahead` levels below."""
        letters = set(range(1, self.directive.d + 1))
        for k in range(level + self.lookahead - 1, level - 1, -1):
            firsts = _first_letters(self.directive[k])
            letters = {firsts[c - 1] for c in letters}
        return letters

    def _extend_chain(self, n: int) -> None:
        with self._lock:
            while len(self.chain) <= n:
                k = len(self.chain) - 1
                firsts = _first_letters(self.directive[k])
                ok = self._admissible(k + 1)
                cands = [c for c in range(1, self.directive.d + 1)
                         if firsts[c - 1] == self.chain[k] and c in ok]
                if not cands:
                    cands = [c for c in range(1, self.directive.d + 1) if firsts[c - 1] == self.chain[k]]
                if not cands:
                    raise DirectiveError(f"chain cannot be extended past level {k}")
                self.chain.append(cands[0])

    def letter_at(self, n: int) -> int:
        self._extend_chain(n)
        return self.chain[n]

    def _produce(self, level: int, k: int) -> bytes:
        n = level + 1
        while True:
            a = self.letter_at(n)
            M = self.directive.matrix(level, n) if level else self.directive.matrix(0, n)
            if sum(row[a - 1] for row in M) >= k:
                return self.directive.apply_window(level, n, bytes([a]))
            n += 1
            if n - level > 100_000:
                raise InsufficientData("prefix lengths do not grow (directive not primitive?)")

    def prefix(self, n: int) -> bytes:
        return self.stream.prefix(n)

    def level_prefix(self, level: int, length: int) -> bytes:
        """Prefix of the level-`level` limit sequence w^(level) along the same chain."""
        if level == 0:
            return self.prefix(length)
        return self._produce(level, length)[:length]


def limit_sequences(directive: DirectiveSequence, depth: int = 64, lookahead: int = 32) -> list[LimitSequence]:
    """All limit sequences distinguishable at the given depth, ordered by a_0."""
    prim = primitivity_check(directive, 0, cap=depth)
    if not prim.ok:
        raise DirectiveError(f"primitivity not witnessed within depth {depth}")
    d = directive.d
    top = depth
    keep = max(1, depth - lookahead)
    chains = set()
    for b in range(1, d + 1):
        chain = [b]
        for k in range(top - 1, -1, -1):
            chain.append(_first_letters(directive[k])[chain[-1] - 1])
        chain.reverse()
        chains.add(tuple(chain[:keep + 1]))
    return [LimitSequence(directive, c, lookahead) for c in sorted(chains)]


# ------------------------------------------------------- language, freqs

@dataclass
class LanguageResult:
    words: dict[int, set[bytes]]
    horizon: int
    stabilized: bool


def language(directive: DirectiveSequence, level: int, max_length: int,
             cap: int = 64, max_word: int = 2_000_000) -> LanguageResult:
    """Factors of length <= L of sigma_[m,n)(a), n growing until the factor
    sets stop changing between two consecutive horizons."""
    if max_length == 0:
        return LanguageResult({0: {b""}}, level, True)
    d = directive.d
    prev = None
    result: dict[int, set[bytes]] = {}
    for n in range(level + 1, level + cap + 1):
        result = {L: set() for L in range(max_length + 1)}
        result[0] = {b""}
        images = [directive.apply_window(level, n, bytes([a])) for a in range(1, d + 1)]
        if sum(map(len, images)) > max_word:
            return LanguageResult(prev or result, n - 1, False)
        for img in images:
            for L in range(1, min(max_length, len(img)) + 1):
                result[L] |= factors(img, L)
        short = min(map(len, images)) < max_length
        if prev is not None and prev == result and not short:
            return LanguageResult(result, n, True)
        prev = result
    return LanguageResult(result, level + cap, False)


@dataclass(frozen=True)
class FrequencyReport:
    frequencies: np.ndarray
    max_deviation: float
    window: int
    horizon: int


def letter_frequencies(word, horizon: int, d: int | None = None) -> FrequencyReport:
    """Empirical frequencies and worst deviation over windows of length horizon/10."""
    if isinstance(word, LimitSequence):
        d = word.directive.d
        b = word.prefix(horizon)
    else:
        b = as_bytes(word)[:horizon]
        d = d or max(b)
    counts = np.array(abelianize(b, d), float)
    freqs = counts / len(b)
    win = max(1, len(b) // 10)
    arr = np.frombuffer(b, dtype=np.uint8)
    dev = 0.0
    for a in range(1, d + 1):
        cs = np.concatenate(([0], np.cumsum(arr == a)))
        wf = (cs[win:] - cs[:-win]) / win
        dev = max(dev, float(np.abs(wf - freqs[a - 1]).max()))
    return FrequencyReport(freqs, dev, win, len(b))


# ------------------------------------------------------- imbalance

@dataclass(frozen=True)
class ImbalancedBlock:
    keys: tuple[int, ...]
    substitution: Substitution
    u: bytes
    v: bytes
    letter: int
    imbalance: int


def imbalanced_ar_block(C: int) -> ImbalancedBlock:
    """A composition of Arnoux-Rauzy substitutions whose image of any
    Arnoux-Rauzy sequence contains equal-length factors u, v whose counts of
    one letter differ by C+1.

    Built by induction from sigma_1 sigma_2 with u=212, v=131.
    """
    if C < 1:
        raise ValueError("C must be >= 1")
    AR = builtin_family("arnoux_rauzy")

    def plus(a, w):
        return AR[a].apply(w) + bytes([a])

    def minus(a, w):
        return AR[a].apply(w)[1:]

    keys = [1, 2]
    u, v = b"\x02\x01\x02", b"\x01\x03\x01"
    i, j, k = 1, 2, 3
    n = 2
    while n < C + 1:
        new_u, new_v = v, u
        for _ in range(n):
            new_u, new_v = plus(i, new_u), minus(i, new_v)
        for _ in range(n):
            new_u, new_v = minus(k, new_u), plus(k, new_v)
        u, v = new_u, new_v
        keys = [k] * n + [i] * n + keys
        i, j, k = k, i, j
        n += 1
    sub = identity_substitution(3)
    for key in keys:
        sub = sub.compose(AR[key])
    cu, cv = abelianize(u, 3), abelianize(v, 3)
    return ImbalancedBlock(tuple(keys), sub, u, v, j, cu[j - 1] - cv[j - 1])


# ------------------------------------------------------- hypothesis report

def hypothesis_report(directive: DirectiveSequence, horizon: int = 16, prefix_length: int = 20_000,
                      balance_C: int | None = None, max_balance_length: int = 256) -> dict:
    """Machine-checkable witnesses for the standing hypotheses, as plain data."""
    prim = primitivity_check(directive, horizon)
    rec = []
    for l in (1, 2, 4, 8):
        n = recurrence_check(directive, l, horizon=4096)
        rec.append({"block_length": l, "return_index": n})
    irr = algebraic_irreducibility_check(directive, 0, min(horizon, 8))
    seqs = limit_sequences(directive)
    w = seqs[0].prefix(prefix_length)
    C = balance_C
    verdict = None
    if C is None:
        for C in range(1, 16):
            verdict = balance_check(w, C, directive.d, max_balance_length)
            if verdict.balanced:
                break
    else:
        verdict = balance_check(w, C, directive.d, max_balance_length)
    return {
        "directive": directive.describe(),
        "primitive": {"witnesses": {str(m): n for m, n in prim.witnesses.items()}, "ok": prim.ok},
        "recurrence": rec,
        "irreducible_windows": [{"m": v.m, "l": v.l, "charpoly": list(v.charpoly),
                                 "irreducible": v.irreducible} for v in irr],
        "balance": {"C": verdict.C, "horizon": verdict.horizon, "max_length": verdict.max_length,
                    "balanced": verdict.balanced,
                    "witness": None if verdict.balanced else
                    [render(verdict.witness[0]), render(verdict.witness[1]), verdict.witness[2]]},
        "limit_sequences": len(seqs),
        "minimal_uniquely_ergodic": ("witnessed up to horizon" if prim.ok and rec[-1]["return_index"]
                                     else "not witnessed"),
    }
