"""Community-adaptive cosine thresholds and overlap expansion.

Every vertex keeps its initial community and joins another community ``j``
when its top-fraction mean cosine to ``j`` reaches ``j``'s threshold. The
threshold is a low quantile of the internal pairwise cosines of ``j``,
relaxed by ``delta`` and floored at ``theta_min``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .communities import Cover, Partition
from .embed import FBEmbedding

# absorbs binary rounding in products like 0.1 * 30 before taking a ceiling
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class OverlapParams:
    q: float = 0.1
    delta: float = 0.05
    eta: float = 0.20
    theta_min: float = -0.40
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")


def _ceil(x: float) -> int:
    return math.ceil(x - _CEIL_SLACK)


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """Lower nearest-rank quantile: the ``max(1, ceil(q m))``-th smallest value."""
    m = values.size
    k = max(1, _ceil(q * m))
    return float(np.partition(values, k - 1)[k - 1])


def internal_cosine_quantile(members, e: FBEmbedding, q: float) -> float | None:
    """q-quantile of the pairwise cosines inside ``members``; None below two members."""
    members = np.asarray(members, dtype=np.int64)
    if members.size < 2:
        return None
    z = e.coords[members]
    iu = np.triu_indices(members.size, k=1)
    return nearest_rank_quantile((z @ z.T)[iu], q)


def community_threshold(quantile: float | None, params: OverlapParams) -> float:
    if quantile is None:
        return params.theta_min
    return max(params.theta_min, quantile - params.delta + params.epsilon)


def top_fraction_size(size: int, eta: float) -> int:
    return max(1, _ceil(eta * size))


def vertex_community_score(u: int, members, e: FBEmbedding, eta: float) -> float:
    """Mean of the ``max(1, ceil(eta |C|))`` largest cosines from ``u`` into ``C``."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("community has no members")
    sims = e.coords[members] @ e.coords[u]
    ell = top_fraction_size(members.size, eta)
    return float(np.sort(sims)[::-1][:ell].mean())


def community_scores(e: FBEmbedding, members, eta: float, sources=None) -> np.ndarray:
    """Scores of ``sources`` (default: all vertices) against one community.

    Works one community at a time, so memory is ``O(n |C|)``.
    """
    members = np.asarray(members, dtype=np.int64)
    z = e.coords if sources is None else e.coords[np.asarray(sources, dtype=np.int64)]
    sims = z @ e.coords[members].T
    ell = top_fraction_size(members.size, eta)
    if ell < members.size:
        top = -np.partition(-sims, ell - 1, axis=1)[:, :ell]
    else:
        top = sims
    return top.mean(axis=1)


def assign_memberships(initial: Partition, scores: np.ndarray,
                       thresholds: np.ndarray) -> Cover:
    """Decision rule: keep ``b(u)``, add ``j != b(u)`` iff ``scores[u, j] >= thresholds[j]``.

    ``scores`` is ``n x K``; entries on the ``b(u)`` column are ignored.
    """
    scores = np.asarray(scores, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    n, K = initial.n, initial.K
    if scores.shape != (n, K) or thresholds.shape != (K,):
        raise ValueError(
            f"expected scores {(n, K)} and thresholds {(K,)}, "
            f"got {scores.shape} and {thresholds.shape}")
    accept = scores >= thresholds[None, :]
    accept[np.arange(n), initial.labels] = True
    return Cover(tuple(tuple(np.flatnonzero(row).tolist()) for row in accept), K)


def compute_thresholds(p: Partition, e: FBEmbedding, params: OverlapParams) -> np.ndarray:
    return np.array([community_threshold(internal_cosine_quantile(m, e, params.q), params)
                     for m in p.members()])


def expand_overlap(p: Partition, e: FBEmbedding,
                   params: OverlapParams | None = None) -> Cover:
    """Expand a disjoint partition into a cover using cosine geometry only."""
    if params is None:
        params = OverlapParams()
    if p.n != e.n:
        raise ValueError(f"partition has {p.n} vertices, embedding has {e.n}")
    members = p.members()
    thresholds = compute_thresholds(p, e, params)
    scores = np.full((p.n, p.K), -np.inf)
    for j, m in enumerate(members):
        if m.size:
            outside = np.flatnonzero(p.labels != j)
            scores[outside, j] = community_scores(e, m, params.eta, outside)
    return assign_memberships(p, scores, thresholds)
