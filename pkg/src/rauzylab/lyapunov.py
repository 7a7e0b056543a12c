"""Monte-Carlo Lyapunov exponents of the cocycle of incidence matrices.

Products are accumulated for all replicas at once with einsum. The second
exterior power is carried along through the matrices of 2x2 minors
(Cauchy-Binet makes that a homomorphism), so theta_1 + theta_2 comes from the
same random product as theta_1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .substitution import Substitution


MIN_LENGTH = 1000


def wedge2(M: np.ndarray) -> np.ndarray:
    """Matrix of 2x2 minors, rows and columns indexed by pairs i < j."""
    M = np.asarray(M, float)
    d = M.shape[0]
    pairs = list(itertools.combinations(range(d), 2))
    out = np.empty((len(pairs), len(pairs)))
    for r, (i, j) in enumerate(pairs):
        for c, (k, l) in enumerate(pairs):
            out[r, c] = M[i, k] * M[j, l] - M[i, l] * M[j, k]
    return out


@dataclass
class CocycleRun:
    """Matrices of the family, a Bernoulli (weights) or Markov (transition)
    measure on their indices, the seed and the product length."""

    matrices: list[np.ndarray]
    n: int = 100_000
    replicas: int = 32
    seed: int = 0
    weights: Sequence[float] | None = None
    transition: np.ndarray | None = None
    label: str = ""
    renormalize_every: int = 32

    @classmethod
    def from_family(cls, family: Mapping[int, Substitution] | Sequence[Substitution], **kw) -> "CocycleRun":
        subs = list(family.values()) if isinstance(family, Mapping) else list(family)
        return cls([np.array(s.incidence, float) for s in subs], **kw)


@dataclass
class ExponentEstimate:
    theta1: float
    theta2: float
    stderr1: float
    stderr2: float
    n: int
    replicas: int
    per_replica: np.ndarray = field(repr=False)
    degenerate: bool = False
    label: str = ""

    @property
    def verdict(self) -> str:
        # short products carry an O(1/n) bias the replica spread cannot see
        if self.n < MIN_LENGTH:
            return "inconclusive"
        return pisot_verdict(self.theta1, self.theta2, self.stderr1, self.stderr2)

    def to_json(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "per_replica"}
        out["verdict"] = self.verdict
        return out


def _sample_keys(run: CocycleRun) -> np.ndarray:
    """(replicas, n) indices; replica r uses the generator seeded by (seed, r)."""
    k = len(run.matrices)
    out = np.empty((run.replicas, run.n), dtype=np.int64)
    for r in range(run.replicas):
        rng = np.random.default_rng([run.seed, r])
        if run.transition is None:
            p = None if run.weights is None else np.asarray(run.weights, float) / np.sum(run.weights)
            out[r] = rng.choice(k, size=run.n, p=p)
        else:
            T = np.asarray(run.transition, float)
            T = T / T.sum(axis=1, keepdims=True)
            cum = np.cumsum(T, axis=1)
            u = rng.random(run.n)
            state = int(rng.integers(k))
            for t in range(run.n):
                out[r, t] = state
                state = min(int(np.searchsorted(cum[state], u[t], side="right")), k - 1)
    return out


def _sup(P: np.ndarray) -> np.ndarray:
    """Sup-norm (max absolute row sum) of each matrix in a batch."""
    return np.abs(P).sum(axis=2).max(axis=1)


def estimate_exponents(run: CocycleRun, transpose: bool = False) -> ExponentEstimate:
    """theta_1 from (1/n) log ||M_[0,n)||, theta_1 + theta_2 from
    (1/n) log ||wedge^2 M_[0,n)||, sup-norms, averaged over replicas.

    With transpose=True the product (M_[0,n))^t = M_{n-1}^t ... M_0^t is
    built instead; its exponents coincide.
    """
    keys = _sample_keys(run)
    mats = np.stack([np.asarray(m, float) for m in run.matrices])
    d = mats.shape[1]
    R = run.replicas
    if transpose:
        mats = mats.transpose(0, 2, 1)
    wed = np.stack([wedge2(m) for m in mats]) if d >= 2 else None
    P = np.broadcast_to(np.eye(d), (R, d, d)).copy()
    W = np.broadcast_to(np.eye(wed.shape[1]), (R,) + wed.shape[1:]).copy() if wed is not None else None
    log1 = np.zeros(R)
    log2 = np.zeros(R)
    mult = "rij,rjk->rik"
    for t in range(run.n):
        k = keys[:, t]
        if transpose:
            P = np.einsum(mult, mats[k], P)
            if W is not None:
                W = np.einsum(mult, wed[k], W)
        else:
            P = np.einsum(mult, P, mats[k])
            if W is not None:
                W = np.einsum(mult, W, wed[k])
        if (t + 1) % run.renormalize_every == 0 or t == run.n - 1:
            s = _sup(P)
            if (s == 0).any():
                raise FloatingPointError("product collapsed to zero")
            P /= s[:, None, None]
            log1 += np.log(s)
            if W is not None:
                s2 = _sup(W)
                W /= np.where(s2 > 0, s2, 1.0)[:, None, None]
                log2 += np.log(np.where(s2 > 0, s2, 1e-300))
    t1 = log1 / run.n
    t12 = log2 / run.n if W is not None else np.full(R, np.nan)
    t2 = t12 - t1
    per = np.column_stack([t1, t2])
    se = per.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros(2)
    degenerate = bool(np.all(per == per[0]))
    return ExponentEstimate(float(t1.mean()), float(t2.mean()), float(se[0]), float(se[1]),
                            run.n, R, per, degenerate, run.label)


def pisot_verdict(theta1: float, theta2: float, stderr1: float, stderr2: float) -> str:
    """satisfied: theta1 > 0 > theta2 with both 2-stderr intervals clear of 0;
    violated: an interval lies on the wrong side of 0 (or touches it when
    the estimate is exact); inconclusive otherwise."""
    if theta1 - 2 * stderr1 > 0 and theta2 + 2 * stderr2 < 0:
        return "satisfied"
    if theta1 + 2 * stderr1 <= 0 or theta2 - 2 * stderr2 >= 0:
        return "violated"
    return "inconclusive"


def exact_log_eigenvalues(M) -> np.ndarray:
    """log |lambda| of the eigenvalues of an integer matrix, largest first;
    the roots of the exact characteristic polynomial serve as oracle."""
    from .matrices import charpoly

    coeffs = [float(c) for c in charpoly(M)]
    roots = np.roots(coeffs)
    return np.sort(np.log(np.abs(roots)))[::-1]
