"""Rauzy fractal point clouds, set equation and tiling diagnostics, domain
exchange, representation map and natural codings.

All clouds live in the level-0 representation plane w^perp (w = 1 by
default). A level-k object is pushed there through M_[0,k), using
M_[0,k) pi^(k) = pi^(0) M_[0,k); this avoids computing u^(k).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .discrete_geometry import Patch, e1_star_iterate, gamma_patch
from .exact import golden_inverse
from .sadic import DirectiveSequence, generalized_right_eigenvector, limit_sequences
from .words import balance_check

# worker threads for nearest-neighbour queries
WORKERS = int(os.environ.get("RAUZYLAB_THREADS", "1"))


class AmbiguousMembership(RuntimeError):
    def __init__(self, message: str, step: int, point):
        super().__init__(message)
        self.step = step
        self.point = point


# ------------------------------------------------------------ frames

@dataclass(frozen=True)
class ProjectionFrame:
    """pi_{u,w}: x -> x - <x,w>/<u,w> u, followed by coordinates in an
    orthonormal basis of w^perp."""

    u: np.ndarray
    w: np.ndarray
    basis: np.ndarray  # (d-1, d), orthonormal rows spanning w^perp

    @classmethod
    def make(cls, u, w=None) -> "ProjectionFrame":
        u = np.asarray(u, float)
        u = u / u.sum()
        d = len(u)
        w = np.ones(d) if w is None else np.asarray(w, float)
        if abs(u @ w) < 1e-14:
            raise ValueError("<u, w> vanishes")
        if d == 1:
            return cls(u, w, np.zeros((0, 1)))
        # e_1 - e_i projected to w^perp, then Gram-Schmidt (QR)
        raw = np.array([np.eye(d)[0] - np.eye(d)[i] for i in range(1, d)]).T
        raw = raw - np.outer(w, w @ raw) / (w @ w)
        q, _ = np.linalg.qr(raw)
        q = q * np.sign(np.diag(q.T @ raw))  # keep orientation of the raw vectors
        return cls(u, w, q.T)

    @classmethod
    def for_directive(cls, directive: DirectiveSequence, w=None) -> "ProjectionFrame":
        u, _, _ = generalized_right_eigenvector(directive, eps=1e-12)
        return cls.make(u, w)

    @property
    def d(self) -> int:
        return len(self.u)

    def projector(self) -> np.ndarray:
        """pi_{u,w} as a d x d matrix."""
        return np.eye(self.d) - np.outer(self.u, self.w) / (self.u @ self.w)

    def project(self, x) -> np.ndarray:
        """Coordinates of pi_{u,w} x in the basis; x of shape (..., d)."""
        x = np.asarray(x, float)
        return x @ self.projector().T @ self.basis.T

    def lift(self, coords) -> np.ndarray:
        return np.asarray(coords, float) @ self.basis

    def translation(self, i: int) -> np.ndarray:
        """pi_{u,w} e_i in basis coordinates."""
        return self.project(np.eye(self.d)[i - 1])

    def lattice_basis(self) -> np.ndarray:
        """Coordinates of e_1 - e_i (i >= 2); these span Lambda in 1^perp."""
        d = self.d
        return self.project(np.array([np.eye(d)[0] - np.eye(d)[i] for i in range(1, d)]))


# ------------------------------------------------------------ clouds

@dataclass
class PointCloud:
    """Labeled points pi l(p) for prefixes p i of limit sequences.

    `vectors` holds the exact abelian vectors (pushed to level 0 when the
    cloud comes from a deeper level); `plen` the prefix lengths.
    """

    coords: np.ndarray
    labels: np.ndarray
    plen: np.ndarray
    vectors: np.ndarray
    frame: ProjectionFrame
    meta: dict = field(default_factory=dict)
    _trees: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.labels)

    def subtile(self, i: int) -> np.ndarray:
        return self.coords[self.labels == i]

    def tree(self, i: int | None = None) -> cKDTree:
        if i not in self._trees:
            pts = self.coords if i is None else self.subtile(i)
            self._trees[i] = cKDTree(pts)
        return self._trees[i]

    def nn_median(self) -> float:
        """Median distance from a point to its nearest other point."""
        dist, _ = self.tree().query(self.coords, k=2, workers=WORKERS)
        return float(np.median(dist[:, 1]))

    def diameter_sup(self) -> float:
        """Sup-norm diameter of the pi_{u,1} images in R^d."""
        pts = self.frame.lift(self.coords)
        return float((pts.max(axis=0) - pts.min(axis=0)).max())

    def to_lines(self) -> str:
        rows = []
        for c, lab, n in zip(self.coords, self.labels, self.plen):
            rows.append(" ".join(f"{v:.9g}" for v in c) + f" {lab} {n}")
        return "\n".join(rows)


def _prefix_vectors(word: bytes, d: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Abelian vectors of word[:k] and the following letters, k in [start, len-1)."""
    arr = np.frombuffer(word, dtype=np.uint8).astype(np.int64)
    onehot = np.zeros((len(arr), d), np.int64)
    onehot[np.arange(len(arr)), arr - 1] = 1
    cum = np.vstack([np.zeros((1, d), np.int64), np.cumsum(onehot, axis=0)])
    ks = np.arange(start, len(arr))
    return cum[ks], arr[ks]


def rauzy_cloud(directive: DirectiveSequence, N: int, frame: ProjectionFrame | None = None,
                level: int = 0, sequences: Sequence[int] | None = None, start: int = 0,
                dedup: bool = True) -> PointCloud:
    """Points pi l(p), labeled by i, for prefixes p i of the level-`level`
    limit sequences with start <= |p| < start + N, pushed to level 0 by
    M_[0,level). `sequences` picks limit sequences by index (default all)."""
    frame = frame or ProjectionFrame.for_directive(directive)
    d = directive.d
    seqs = limit_sequences(directive)
    picked = range(len(seqs)) if sequences is None else sequences
    M = np.array(directive.matrix(0, level), dtype=float) if level else None
    vecs, labs, lens = [], [], []
    for s in picked:
        word = seqs[s].level_prefix(level, start + N)
        v, lab = _prefix_vectors(word, d, start)
        vecs.append(v)
        labs.append(lab)
        lens.append(np.arange(start, start + len(lab)))
    vec = np.vstack(vecs)
    lab = np.concatenate(labs)
    plen = np.concatenate(lens)
    if dedup and len(picked) > 1:
        _, idx = np.unique(np.column_stack([vec, lab]), axis=0, return_index=True)
        idx.sort()
        vec, lab, plen = vec[idx], lab[idx], plen[idx]
    pushed = vec @ M.T if M is not None else vec
    return PointCloud(frame.project(pushed), lab, plen, pushed, frame,
                      {"directive": directive.describe(), "level": level, "N": N, "start": start})


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    da, _ = cKDTree(b).query(a, workers=WORKERS)
    db, _ = cKDTree(a).query(b, workers=WORKERS)
    return float(max(da.max(), db.max()))


# ------------------------------------------------------------ set equation

@dataclass
class SetEquationReport:
    k: int
    l: int
    N: int
    letter: int
    children: int
    distance: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.distance <= self.tolerance


def set_equation_check(directive: DirectiveSequence, k: int, l: int, N: int,
                       letters: Sequence[int] | None = None, slack: float = 3.0,
                       frame: ProjectionFrame | None = None) -> list[SetEquationReport]:
    """Compare the level-k subtile R^(k)(i) with the union over
    [y, j] in E1*(sigma_[k,l))[0, i] of M_[k,l)(pi^(l) y + R^(l)(j)).

    Both sides are N-point clouds pushed to level 0. The tolerance is
    `slack` times the nearest-neighbour median of the whole level-k cloud.
    """
    if not k < l:
        raise ValueError("need k < l")
    frame = frame or ProjectionFrame.for_directive(directive)
    d = directive.d
    parent = rauzy_cloud(directive, N, frame, level=k)
    child = rauzy_cloud(directive, N, frame, level=l, dedup=False)
    tol = slack * parent.nn_median()
    Mk = np.array(directive.matrix(0, k), dtype=float)
    Ml = np.array(directive.matrix(0, l), dtype=float)
    block = directive.window(k, l)
    out = []
    for i in letters or range(1, d + 1):
        faces = e1_star_iterate(block, Patch.seed(d, [i]))
        pieces = []
        for y, j in zip(faces.coords, faces.types):
            sel = child.labels == j
            # child.vectors are M_[0,l) l(p'); add M_[0,l) y
            pieces.append(child.vectors[sel] + Ml @ y)
        pts = frame.project(np.vstack(pieces))
        dist = hausdorff(parent.subtile(i), pts)
        out.append(SetEquationReport(k, l, N, i, len(faces), dist, tol))
    return out


def subtile_shrink_check(directive: DirectiveSequence, n_max: int, N: int = 2000,
                         frame: ProjectionFrame | None = None) -> list[tuple[int, float]]:
    """(n, max ||M_[0,n) x||_inf) over the level-n cloud, n = 0..n_max."""
    frame = frame or ProjectionFrame.for_directive(directive)
    out = []
    for n in range(n_max + 1):
        cloud = rauzy_cloud(directive, N, frame, level=n, sequences=[0])
        out.append((n, float(np.abs(frame.lift(cloud.coords)).max())))
    return out


# ------------------------------------------------------------ tiling

@dataclass
class MultiplicityHistogram:
    counts: dict[int, int]
    samples: int
    eps: float

    @property
    def mode(self) -> int:
        return max(self.counts, key=self.counts.get)

    def fraction(self, m: int) -> float:
        return self.counts.get(m, 0) / self.samples


def tiling_multiplicity_sample(cloud: PointCloud, samples: int = 2000, radius: int | None = None,
                               eps: float | None = None, seed: int = 0,
                               copies: int = 1, eps_factor: float = 1.5) -> MultiplicityHistogram:
    """Heuristic multiplicity of the collection {pi x + R(i) : [x, i] in Gamma(1)}.

    Points z are drawn uniformly from the bounding box of R; each tile within
    eps of z counts once (`copies` > 1 duplicates every tile, a negative
    control). The result suggests, not proves, a tiling.

    eps defaults to 1.5 nearest-neighbour medians: wider margins make the
    collar around each tile boundary dominate for ragged subtiles.
    """
    frame = cloud.frame
    d = frame.d
    eps = eps_factor * cloud.nn_median() if eps is None else eps
    lo, hi = cloud.coords.min(axis=0), cloud.coords.max(axis=0)
    if radius is None:
        span = float(np.abs(frame.lift(cloud.coords)).max())
        radius = int(np.ceil(2 * span)) + 1
    patch = gamma_patch(np.ones(d, dtype=int), radius)
    offsets = frame.project(patch.coords)
    rng = np.random.default_rng(seed)
    z = lo + (hi - lo) * rng.random((samples, d - 1))
    mult = np.zeros(samples, dtype=int)
    reach = np.linalg.norm(hi - lo) + eps
    for off, i in zip(offsets, patch.types):
        shifted = z - off
        close = np.linalg.norm(shifted - (lo + hi) / 2, axis=1) <= reach
        if not close.any():
            continue
        tree = cloud.tree(int(i))
        dist, _ = tree.query(shifted[close], distance_upper_bound=eps, workers=WORKERS)
        mult[np.flatnonzero(close)[np.isfinite(dist)]] += copies
    vals, cnt = np.unique(mult, return_counts=True)
    return MultiplicityHistogram({int(v): int(c) for v, c in zip(vals, cnt)}, samples, eps)


# ------------------------------------------------------------ membership

@dataclass
class Membership:
    label: int
    distance: float
    contested: bool


def _nearest_labels(cloud: PointCloud, pts: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Nearest label and distance, plus the runner-up distance among other labels."""
    d = cloud.frame.d
    dists = np.stack([cloud.tree(i).query(pts, workers=WORKERS)[0] for i in range(1, d + 1)], axis=1)
    order = np.argsort(dists, axis=1)
    best = order[:, 0]
    rows = np.arange(len(pts))
    d1 = dists[rows, best]
    d2 = dists[rows, order[:, 1]] if d > 1 else np.full(len(pts), np.inf)
    return best + 1, d1, d2, (d2 <= eps)


@dataclass
class OrbitReport:
    labels: bytes
    contested: int
    eps: float


def domain_exchange_orbit(cloud: PointCloud, start, steps: int, eps: float | None = None) -> OrbitReport:
    """Iterate E: x -> x + pi e_i for x in R(i), labelling x by its nearest
    subtile. A point is contested when another subtile is also within eps;
    only an exact tie aborts."""
    frame = cloud.frame
    eps = 3 * cloud.nn_median() if eps is None else eps
    t = np.array([frame.translation(i) for i in range(1, frame.d + 1)])
    x = np.asarray(start, float).copy()
    out = bytearray()
    contested = 0
    for n in range(steps):
        lab, d1, d2, cont = _nearest_labels(cloud, x[None, :], eps)
        if d1[0] > eps:
            raise AmbiguousMembership(f"orbit left the cloud at step {n}", n, x.copy())
        if cont[0]:
            contested += 1
            if abs(d2[0] - d1[0]) <= 1e-12:
                raise AmbiguousMembership(f"tie between subtiles at step {n}", n, x.copy())
        out.append(int(lab[0]))
        x = x + t[lab[0] - 1]
    return OrbitReport(bytes(out), contested, eps)


@dataclass
class RepresentationPoint:
    centre: np.ndarray
    radius: float
    count: int


def representation_point(v: bytes, cloud: PointCloud, word: bytes) -> RepresentationPoint:
    """Approximate phi(v): the points pi l(p) of the cloud whose following
    letters spell v in `word` (a long prefix of the limit sequence the cloud
    was built from). n = 0 gives the bounding ball of the whole cloud."""
    n = len(v)
    if n == 0:
        pts = cloud.coords
    else:
        arr = np.frombuffer(word, np.uint8)
        L = min(len(arr) - n + 1, int(cloud.plen.max()) + 1)
        win = np.lib.stride_tricks.sliding_window_view(arr, n)[:L]
        hits = np.flatnonzero((win == np.frombuffer(v, np.uint8)).all(axis=1))
        if not len(hits):
            raise ValueError("prefix not found in the language at this horizon")
        pos = {int(p): k for k, p in enumerate(cloud.plen)}
        pts = cloud.coords[[pos[h] for h in hits if h in pos]]
    centre = pts.mean(axis=0)
    return RepresentationPoint(centre, float(np.linalg.norm(pts - centre, axis=1).max()), len(pts))


# ------------------------------------------------------------ codings

@dataclass
class CodingReport:
    agreement: int
    steps: int
    coding: bytes
    contested: int = 0

    @property
    def full(self) -> bool:
        return self.agreement == self.steps


def rotation_coding_interval(alpha, start, breakpoint, steps: int) -> bytes:
    """Coding of x -> {x + alpha} on [0,1) by [0, b) -> 1, [b, 1) -> 2.
    Exact when the inputs are QuadraticNumbers or Fractions."""
    out = bytearray()
    x = start
    for _ in range(steps):
        out.append(1 if x < breakpoint else 2)
        x = x + alpha
        x = x - math.floor(x)
    return bytes(out)


def natural_coding_crosscheck_interval(word: bytes, alpha=None, start=None, breakpoint=None,
                                       steps: int = 1000) -> CodingReport:
    """Default: rotation by phi^-2 of phi^-1 with partition [0, phi^-1), [phi^-1, 1)."""
    phi_inv = golden_inverse()
    alpha = 1 - phi_inv if alpha is None else alpha  # phi^-2 = 1 - phi^-1
    start = phi_inv if start is None else start
    breakpoint = phi_inv if breakpoint is None else breakpoint
    code = rotation_coding_interval(alpha, start, breakpoint, steps)
    return CodingReport(_agreement(code, word), steps, code)


def _agreement(a: bytes, b: bytes) -> int:
    n = min(len(a), len(b))
    for k in range(n):
        if a[k] != b[k]:
            return k
    return n


def torus_coding(cloud: PointCloud, t, steps: int, eps: float | None = None,
                 search: int = 2, start=None) -> tuple[np.ndarray, int]:
    """Code the orbit of x -> x + t on 1^perp / Lambda by the subtile that
    contains some lattice translate of the orbit point.

    Returns the labels and the number of contested points. An exact tie
    between two different labels raises AmbiguousMembership.
    """
    frame = cloud.frame
    d = frame.d
    eps = 3 * cloud.nn_median() if eps is None else eps
    B = frame.lattice_basis()  # rows
    t = np.asarray(t, float)
    x0 = np.zeros(d - 1) if start is None else np.asarray(start, float)
    pts = x0 + np.arange(steps)[:, None] * t
    # reduce to the parallelotope spanned by B, then search nearby translates
    centre = cloud.coords.mean(axis=0)
    coef = np.linalg.solve(B.T, (pts - centre).T).T
    pts = pts - np.floor(coef) @ B
    shifts = np.array(list(np.ndindex(*([2 * search + 1] * (d - 1))))) - search
    per_label = np.full((steps, d), np.inf)
    for c in shifts:
        q = pts - c @ B
        for i in range(1, d + 1):
            per_label[:, i - 1] = np.minimum(per_label[:, i - 1], cloud.tree(i).query(q, workers=WORKERS)[0])
    order = np.sort(per_label, axis=1)
    best_d, second = order[:, 0], order[:, 1]
    best_lab = per_label.argmin(axis=1) + 1
    if (best_d > eps).any():
        k = int(np.argmax(best_d > eps))
        raise AmbiguousMembership(f"orbit point {k} is not within eps of the cloud", k, pts[k])
    ties = np.abs(second - best_d) <= 1e-12
    if ties.any():
        k = int(np.argmax(ties))
        raise AmbiguousMembership(f"tie between subtiles at step {k}", k, pts[k])
    return best_lab, int((second <= eps).sum())


def natural_coding_crosscheck_torus(cloud: PointCloud, word: bytes, steps: int = 1000,
                                    eps: float | None = None) -> CodingReport:
    """Rotation by t = pi e_1 mod Lambda from the origin, coded by subtiles."""
    labels, contested = torus_coding(cloud, cloud.frame.translation(1), steps, eps)
    code = bytes(labels.astype(np.uint8).tolist())
    return CodingReport(_agreement(code, word), steps, code, contested)


@dataclass
class RemainderTrack:
    n: np.ndarray
    discrepancy: np.ndarray
    frequency: float

    @property
    def maximum(self) -> float:
        return float(np.abs(self.discrepancy).max())


def bounded_remainder_probe(visits: np.ndarray, frequency: float | None = None,
                            checkpoints: int = 50) -> RemainderTrack:
    """|#{n < N : visit} - gamma N| at log-spaced N, gamma the empirical
    frequency unless given."""
    visits = np.asarray(visits, bool)
    N = len(visits)
    gamma = visits.mean() if frequency is None else frequency
    cum = np.cumsum(visits)
    ns = np.unique(np.geomspace(1, N, checkpoints).astype(int))
    disc = cum[ns - 1] - gamma * ns
    return RemainderTrack(ns, disc, float(gamma))


def subtile_visits(cloud: PointCloud, i: int | None, steps: int, eps: float | None = None) -> np.ndarray:
    """Visits of the rotation orbit of 0 by pi e_1 to subtile i (None: all)."""
    labels, _ = torus_coding(cloud, cloud.frame.translation(1), steps, eps)
    return np.ones(steps, bool) if i is None else labels == i


def interval_visits(alpha: float, a: float, b: float, steps: int, start: float = 0.0) -> np.ndarray:
    x = (start + alpha * np.arange(steps)) % 1.0
    return (x >= a) & (x < b)


def balance_constant(word: bytes, d: int, cap: int = 16, max_length: int = 200) -> int:
    """Smallest C <= cap with no imbalance witness on `word`."""
    for C in range(1, cap + 1):
        if balance_check(word, C, d, max_length).balanced:
            return C
    return cap + 1
