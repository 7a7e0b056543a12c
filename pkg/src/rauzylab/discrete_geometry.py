"""Faces [x, i], discrete hyperplanes, patches and the dual map E1*."""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import matrices as mx
from .substitution import Substitution
from .words import abelianize, balance_check


class Face(NamedTuple):
    x: tuple[int, ...]
    i: int

    def __str__(self):
        return f"[({', '.join(map(str, self.x))}), {self.i}]"


class PatchBudgetExceeded(RuntimeError):
    pass


class Patch:
    """A duplicate-free finite set of faces, stored as integer arrays.

    coords has shape (N, d); types holds letters 1..d.
    """

    __slots__ = ("coords", "types", "_set")

    def __init__(self, coords, types, *, dedup: bool = True):
        coords = np.asarray(coords, dtype=np.int64).reshape(len(types), -1)
        types = np.asarray(types, dtype=np.int64)
        if dedup and len(types):
            key = np.column_stack([coords, types])
            key = np.unique(key, axis=0)
            coords, types = key[:, :-1], key[:, -1]
        self.coords = coords
        self.types = types
        self._set = None

    @classmethod
    def from_faces(cls, faces: Iterable, d: int | None = None) -> "Patch":
        faces = [Face(tuple(f[0]), int(f[1])) for f in faces]
        if not faces:
            return cls(np.zeros((0, d or 0), np.int64), np.zeros(0, np.int64))
        return cls([f.x for f in faces], [f.i for f in faces])

    @classmethod
    def seed(cls, d: int, letters: Iterable[int] | None = None) -> "Patch":
        """U = {[0, i]} (all letters by default)."""
        letters = list(range(1, d + 1)) if letters is None else list(letters)
        return cls(np.zeros((len(letters), d), np.int64), letters)

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return len(self.types)

    def faces(self) -> set[Face]:
        if self._set is None:
            self._set = {Face(tuple(int(v) for v in x), int(i)) for x, i in zip(self.coords, self.types)}
        return self._set

    def __contains__(self, face) -> bool:
        return Face(tuple(face[0]), int(face[1])) in self.faces()

    def __eq__(self, other):
        return isinstance(other, Patch) and self.faces() == other.faces()

    def __iter__(self):
        return iter(sorted(self.faces()))

    def union(self, other: "Patch") -> "Patch":
        return Patch(np.vstack([self.coords, other.coords]), np.concatenate([self.types, other.types]))

    def translate(self, v) -> "Patch":
        return Patch(self.coords + np.asarray(v, np.int64), self.types, dedup=False)

    def issubset(self, other: "Patch") -> bool:
        return self.faces() <= other.faces()

    def to_lines(self) -> str:
        return "\n".join(" ".join(map(str, f.x)) + f" {f.i}" for f in self)

    @classmethod
    def from_lines(cls, text: str) -> "Patch":
        faces = []
        for line in text.splitlines():
            if line.strip() and not line.startswith("#"):
                nums = [int(t) for t in line.split()]
                faces.append((tuple(nums[:-1]), nums[-1]))
        return cls.from_faces(faces)


# ------------------------------------------------------------ hyperplanes

def _exact_w(w) -> tuple:
    return tuple(int(v) if float(v).is_integer() else float(v) for v in w)


def gamma_membership(w: Sequence, face) -> bool:
    """0 <= <x, w> < <e_i, w>."""
    x, i = face
    s = sum(a * b for a, b in zip(x, _exact_w(w)))
    return 0 <= s < w[i - 1]


def gamma_mask(w: Sequence, coords: np.ndarray, types: np.ndarray) -> np.ndarray:
    """Vectorised membership; exact for integer normals."""
    w = _exact_w(w)
    if all(isinstance(v, int) for v in w) and max(abs(v) for v in w) < 2 ** 40 \
            and (len(coords) == 0 or np.abs(coords).max() < 2 ** 20):
        wa = np.array(w, dtype=np.int64)
    elif all(isinstance(v, int) for v in w):
        wa = np.array(w, dtype=object)
        coords = coords.astype(object)
    else:
        wa = np.array(w, dtype=float)
    s = coords @ wa
    return (s >= 0) & (s < wa[types - 1])


def gamma_patch(w: Sequence, radius: int) -> Patch:
    """All faces of Gamma(w) with sup-norm of the translate <= radius."""
    d = len(w)
    rng = np.arange(-radius, radius + 1)
    grid = np.array(np.meshgrid(*([rng] * d), indexing="ij")).reshape(d, -1).T
    coords = np.repeat(grid, d, axis=0)
    types = np.tile(np.arange(1, d + 1), len(grid))
    keep = gamma_mask(w, coords, types)
    return Patch(coords[keep], types[keep], dedup=False)


# ------------------------------------------------------------ E1*

@dataclass(frozen=True)
class DualTable:
    """For each letter i: list of (M^{-1} l(p), j) over all p, j with p i a
    prefix of sigma(j)."""

    inverse: mx.IntMatrix
    entries: dict[int, list[tuple[tuple[int, ...], int]]]

    @classmethod
    def of(cls, sub: Substitution) -> "DualTable":
        if not sub.is_unimodular:
            raise ValueError("E1* needs a unimodular substitution")
        inv = sub.inverse_incidence
        d = sub.d
        entries: dict[int, list] = {i: [] for i in range(1, d + 1)}
        for j, img in enumerate(sub.images, start=1):
            for pos, letter in enumerate(img):
                lp = abelianize(img[:pos], d)
                entries[letter].append((mx.matvec(inv, lp), j))
        return cls(inv, entries)


_TABLES: dict[Substitution, DualTable] = {}


def dual_table(sub: Substitution) -> DualTable:
    t = _TABLES.get(sub)
    if t is None:
        t = _TABLES[sub] = DualTable.of(sub)
    return t


def e1_star(sub: Substitution, target, budget: int = 10 ** 6, table: DualTable | None = None) -> Patch:
    """E1*(sigma) of a face or a patch:
    {[M^{-1}(x + l(p)), j] : p i is a prefix of sigma(j)}."""
    if isinstance(target, Patch):
        patch = target
    else:
        patch = Patch.from_faces([target])
    table = table or dual_table(sub)
    inv = np.array(table.inverse, dtype=np.int64)
    base = patch.coords @ inv.T
    out_c, out_t = [], []
    for i, ents in table.entries.items():
        sel = patch.types == i
        if not sel.any() or not ents:
            continue
        b = base[sel]
        for off, j in ents:
            out_c.append(b + np.array(off, np.int64))
            out_t.append(np.full(len(b), j, np.int64))
    if not out_c:
        return Patch(np.zeros((0, patch.d), np.int64), np.zeros(0, np.int64))
    total = sum(len(t) for t in out_t)
    if total > budget:
        raise PatchBudgetExceeded(f"patch would have {total} faces (budget {budget})")
    return Patch(np.vstack(out_c), np.concatenate(out_t))


def e1_star_iterate(block: Sequence[Substitution], seed: Patch, steps: int | None = None,
                    budget: int = 10 ** 6) -> Patch:
    """E1*(sigma_[0,n)) seed = E1*(sigma_{n-1}) ... E1*(sigma_0) seed, with
    the block cycled to `steps` substitutions (default: one pass)."""
    steps = len(block) if steps is None else steps
    patch = seed
    for k in range(steps):
        patch = e1_star(block[k % len(block)], patch, budget)
    return patch


# ------------------------------------------------------------ Fernique

@dataclass
class FerniqueReport:
    source_normal: tuple
    target_normal: tuple
    radius: int
    source_faces: int
    image_faces: int
    outside_target: int
    overlaps: int
    coverage_radius: int
    uncovered: int

    @property
    def ok(self) -> bool:
        return self.outside_target == 0 and self.overlaps == 0 and self.uncovered == 0


def fernique_check(block: Sequence[Substitution], w: Sequence[int], radius: int,
                   coverage_radius: int | None = None, table_override: dict | None = None) -> FerniqueReport:
    """E1*(block) applied to the faces of Gamma(w) in a sup-ball: images must
    lie in Gamma(M^t w), images of distinct faces must be disjoint, and the
    images must cover the faces of Gamma(M^t w) whose preimages all lie in
    the ball (coverage_radius -1 means that ball is empty).

    `table_override` maps a substitution to a replacement DualTable, for
    negative controls.
    """
    d = len(w)
    M = mx.product([s.incidence for s in block], d)
    w_tgt = mx.matvec(mx.transpose(M), w)
    src = gamma_patch(w, radius)
    coords, types = src.coords, src.types
    owner = np.arange(len(types))
    for s in block:
        tab = (table_override or {}).get(s) or dual_table(s)
        coords, types, owner = e1_star_raw(tab, coords, types, owner)
    inside = gamma_mask(w_tgt, coords, types)
    key = np.column_stack([coords, types])
    # a face hit twice by the image of one source face is not an overlap
    # between distinct faces; count only hits from different owners
    per_owner = np.unique(np.column_stack([key, owner]), axis=0)
    uniq, counts = np.unique(per_owner[:, :-1], axis=0, return_counts=True)
    overlaps = int((counts > 1).sum())
    if coverage_radius is None:
        # preimage of [y, j] is [M y - l(p), i] with p a proper prefix of sigma(j)
        composite = block[0]
        for s in block[1:]:
            composite = composite.compose(s)
        longest = max(len(img) for img in composite.images) - 1
        Minf = max(sum(abs(v) for v in row) for row in M)
        coverage_radius = (radius - longest) // Minf
    uncovered = 0
    if coverage_radius >= 0:
        tgt = gamma_patch(w_tgt, coverage_radius)
        have = {tuple(r) for r in uniq.tolist()}
        uncovered = sum(1 for x, i in zip(tgt.coords.tolist(), tgt.types.tolist())
                        if tuple(x) + (i,) not in have)
    return FerniqueReport(tuple(w), tuple(w_tgt), radius, len(src), len(types),
                          int((~inside).sum()), overlaps, coverage_radius, uncovered)


def e1_star_raw(table: DualTable, coords: np.ndarray, types: np.ndarray, owner: np.ndarray | None = None):
    """E1* without deduplication; `owner` indices are carried along."""
    inv = np.array(table.inverse, dtype=np.int64)
    base = coords @ inv.T
    out_c, out_t, out_o = [], [], []
    for i, ents in table.entries.items():
        sel = types == i
        if not sel.any():
            continue
        b = base[sel]
        o = owner[sel] if owner is not None else None
        for off, j in ents:
            out_c.append(b + np.array(off, np.int64))
            out_t.append(np.full(len(b), j, np.int64))
            if o is not None:
                out_o.append(o)
    d = coords.shape[1]
    c = np.vstack(out_c) if out_c else np.zeros((0, d), np.int64)
    t = np.concatenate(out_t) if out_t else np.zeros(0, np.int64)
    if owner is None:
        return c, t
    return c, t, (np.concatenate(out_o) if out_o else np.zeros(0, np.int64))


# ------------------------------------------------------------ coincidence

@dataclass
class StrongCoincidence:
    ok: bool
    witnesses: dict[tuple[int, int], tuple[int, tuple[int, ...]] | None]


def strong_coincidence_check(block: Sequence[Substitution]) -> StrongCoincidence:
    """For each pair (j1, j2): a letter i and prefixes p1, p2 with equal
    abelianization such that p1 i, p2 i are prefixes of sigma(j1), sigma(j2),
    sigma being the composite of the block."""
    sub = block[0]
    for s in block[1:]:
        sub = sub.compose(s)
    d = sub.d

    def marks(img: bytes) -> dict[tuple, int]:
        out = {}
        counts = [0] * d
        for c in img:
            out.setdefault((tuple(counts), c), len(out))
            counts[c - 1] += 1
        return out

    table = {j: marks(sub.image(j)) for j in range(1, d + 1)}
    wit: dict = {}
    for j1, j2 in itertools.combinations(range(1, d + 1), 2):
        common = set(table[j1]) & set(table[j2])
        if common:
            lp, i = min(common, key=lambda t: (sum(t[0]), t))
            wit[(j1, j2)] = (i, lp)
        else:
            wit[(j1, j2)] = None
    return StrongCoincidence(all(v is not None for v in wit.values()), wit)


@dataclass
class GeometricCoincidence:
    found: bool
    n: int
    letter: int | None
    center: tuple[int, ...] | None
    C: int
    ball_faces: int
    candidates_tried: int


def _projection(u: np.ndarray) -> np.ndarray:
    """Matrix of pi_{u,1}: x -> x - <x,1>/<u,1> u."""
    d = len(u)
    return np.eye(d) - np.outer(u, np.ones(d)) / u.sum()


def geometric_coincidence_check(directive, n: int, C: int | None = None, max_candidates: int = 4096,
                                budget: int = 10 ** 6, balance_horizon: int = 20_000) -> GeometricCoincidence:
    """Search (i, z) such that every face [y, j] of Gamma(M^t 1) with
    ||pi(y - z)||_inf <= C lies in E1*(sigma_[0,n))[0, i], pi projecting
    along M^{-1} u onto 1-perp (M = M_[0,n)).

    z ranges over the translates of the patch closest to its projected
    centroid (at most `max_candidates` of them).
    """
    from .sadic import generalized_right_eigenvector, limit_sequences

    d = directive.d
    M = directive.matrix(0, n)
    w_n = mx.matvec(mx.transpose(M), (1,) * d)
    u, _, _ = generalized_right_eigenvector(directive, eps=1e-10)
    Minv = np.array(mx.integer_inverse(M), dtype=float)
    # with <u, 1> = 1 this gives <u_n, w_n> = 1, which bounds the search box
    u_n = Minv @ (np.asarray(u, float) / np.sum(u))
    P = _projection(u_n)
    if C is None:
        w_level = limit_sequences(directive)[0].level_prefix(n, balance_horizon)
        C = 1
        while not balance_check(w_level, C, d, 200).balanced:
            C += 1
    block = directive.window(0, n)
    tried = 0
    best = None
    for i in range(1, d + 1):
        patch = e1_star_iterate(block, Patch.seed(d, [i]), budget=budget)
        faces = patch.faces()
        proj = patch.coords @ P.T
        centre = proj.mean(axis=0)
        order = np.argsort(np.abs(proj - centre).max(axis=1))
        # box of candidate translates around z large enough for the ball
        wmax = max(w_n)
        s_max = 2 * wmax + C * sum(w_n)
        R = int(np.ceil(C + s_max * np.abs(u_n).max())) + 1
        rng = np.arange(-R, R + 1)
        box = np.array(np.meshgrid(*([rng] * d), indexing="ij")).reshape(d, -1).T
        for idx in order[:max_candidates]:
            tried += 1
            z = patch.coords[idx]
            ys = np.repeat(box + z, d, axis=0)
            ts = np.tile(np.arange(1, d + 1), len(box))
            inside = gamma_mask(w_n, ys, ts)
            near = np.abs((ys - z) @ P.T).max(axis=1) <= C + 1e-12
            sel = inside & near
            ball = {Face(tuple(int(v) for v in y), int(t)) for y, t in zip(ys[sel], ts[sel])}
            if ball and ball <= faces:
                return GeometricCoincidence(True, n, i, tuple(int(v) for v in z), C, len(ball), tried)
            if best is None or len(ball) > best:
                best = len(ball)
    return GeometricCoincidence(False, n, None, None, C, best or 0, tried)


# ------------------------------------------------------------ radius

def _face_vertices(x: tuple, i: int, d: int) -> list[tuple]:
    free = [j for j in range(d) if j != i - 1]
    out = []
    for lam in itertools.product((0, 1), repeat=len(free)):
        v = list(x)
        for j, l in zip(free, lam):
            v[j] += l
        out.append(tuple(v))
    return out


def _face_ridges(x: tuple, i: int, d: int) -> list[tuple]:
    """(d-2)-dimensional sides of the face, as hashable keys."""
    free = [j for j in range(d) if j != i - 1]
    out = []
    for m in free:
        rest = tuple(j for j in free if j != m)
        for lam in (0, 1):
            base = list(x)
            base[m] += lam
            out.append((tuple(base), rest))
    return out


def _ridge_vertices(ridge: tuple) -> list[tuple]:
    base, rest = ridge
    out = []
    for lam in itertools.product((0, 1), repeat=len(rest)):
        v = list(base)
        for j, l in zip(rest, lam):
            v[j] += l
        out.append(tuple(v))
    return out


def boundary_faces(patch: Patch) -> set[Face]:
    """Faces that contain a boundary point of the union of the closed faces.

    A side shared by fewer than two faces lies on the boundary, and so do
    its vertices. This is exact for patches of stepped hyperplanes, where
    every side belongs to exactly two faces of the full hyperplane.
    """
    d = patch.d
    faces = patch.faces()
    count: dict = defaultdict(int)
    for f in faces:
        for r in _face_ridges(f.x, f.i, d):
            count[r] += 1
    bverts = set()
    for r, c in count.items():
        if c < 2:
            bverts.update(_ridge_vertices(r))
    return {f for f in faces if any(v in bverts for v in _face_vertices(f.x, f.i, d))}


class SeedNotContained(ValueError):
    pass


def minimal_combinatorial_radius(patch: Patch, seed: Patch | None = None) -> int:
    """Length of the shortest chain of pairwise intersecting faces that starts
    in the seed and ends in a face touching the boundary of the patch."""
    d = patch.d
    seed = seed if seed is not None else Patch.seed(d)
    faces = patch.faces()
    if not seed.faces() <= faces:
        raise SeedNotContained("seed is not contained in the patch")
    bfaces = boundary_faces(patch)
    by_vertex: dict = defaultdict(list)
    for f in faces:
        for v in _face_vertices(f.x, f.i, d):
            by_vertex[v].append(f)
    dist = {f: 1 for f in seed.faces()}
    queue = deque(seed.faces())
    while queue:
        f = queue.popleft()
        if f in bfaces:
            return dist[f]
        for v in _face_vertices(f.x, f.i, d):
            for g in by_vertex[v]:
                if g not in dist:
                    dist[g] = dist[f] + 1
                    queue.append(g)
    raise ValueError("no boundary face reachable from the seed")


def radius_growth(block: Sequence[Substitution], steps: int, budget: int = 10 ** 6) -> list[tuple[int, int, int]]:
    """(n, |P_[0,n)|, rad P_[0,n)) for the iterated patches E1*(sigma_[0,n)) U,
    the block being cycled; stops early when the budget is exceeded."""
    d = block[0].d
    patch = Patch.seed(d)
    seed = Patch.seed(d)
    out = []
    for n in range(1, steps + 1):
        try:
            patch = e1_star(block[(n - 1) % len(block)], patch, budget)
        except PatchBudgetExceeded:
            break
        if not seed.faces() <= patch.faces():
            out.append((n, len(patch), 0))
            continue
        out.append((n, len(patch), minimal_combinatorial_radius(patch, seed)))
    return out
