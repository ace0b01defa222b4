"""Spherical K-means over forward-backward coordinates, and the disjoint
detection pipeline built on it."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .communities import Partition
from .embed import DEFAULT_TAU, FBEmbedding, build_embedding
from .graph import DiGraph
from .markov import green_diffusive, make_walk_model

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansConfig:
    K: int
    max_iters: int = 100
    n_init: int = 8
    seed: int = 0
    tau: float = DEFAULT_TAU
    workers: int = 1

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.n_init < 1:
            raise ValueError("n_init must be at least 1")


@dataclass
class KMeansRun:
    labels: np.ndarray
    centers: np.ndarray
    objective: float
    iterations: int
    history: list = field(default_factory=list)


def kmeanspp_init(points: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """K-means++ seeding under the squared chordal distance ``2 - 2 cos``.

    Returns the indices of the chosen points. Points identical to an already
    chosen center get zero weight; when every remaining weight is zero the
    next pick is uniform over the points not yet chosen.
    """
    n = points.shape[0]
    if K > n:
        raise ValueError(f"K = {K} exceeds the number of points {n}")
    chosen = [int(rng.integers(n))]
    dist = np.full(n, np.inf)
    for _ in range(1, K):
        c = points[chosen[-1]]
        d = np.maximum(0.0, 2.0 - 2.0 * (points @ c))
        d[np.all(points == c, axis=1)] = 0.0
        np.minimum(dist, d, out=dist)
        dist[chosen] = 0.0
        total = dist.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=dist / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(free[rng.integers(free.size)])
        chosen.append(nxt)
    return np.array(chosen, dtype=np.int64)


def assign_to_centers(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Nearest-center cosine rule; ties go to the lowest center index."""
    return np.argmax(points @ centers.T, axis=1)


def _recenter(points, labels, K, tau):
    centers = np.zeros((K, points.shape[1]))
    np.add.at(centers, labels, points)
    norms = np.linalg.norm(centers, axis=1)
    return centers / np.maximum(norms, tau)[:, None]


def _repair_empty(points, labels, centers, K):
    # farthest-point policy: an empty cluster takes the worst-fitting point
    # from any cluster that can spare one
    counts = np.bincount(labels, minlength=K)
    for j in np.flatnonzero(counts == 0):
        fit = np.einsum("ij,ij->i", points, centers[labels])
        fit[counts[labels] < 2] = np.inf
        u = int(np.argmin(fit))
        counts[labels[u]] -= 1
        labels[u] = j
        counts[j] = 1
        centers[j] = points[u]
    return labels


def _objective(points, labels, centers):
    return float(np.einsum("ij,ij->", points, centers[labels]))


def kmeans_single_run(points: np.ndarray, K: int, rng: np.random.Generator,
                      max_iters: int = 100, tau: float = DEFAULT_TAU) -> KMeansRun:
    """One Lloyd run of spherical K-means from a K-means++ start.

    ``history`` records the within-cluster cosine after every recentering.
    """
    centers = points[kmeanspp_init(points, K, rng)].copy()
    labels = None
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        new = assign_to_centers(points, centers)
        new = _repair_empty(points, new, centers, K)
        changed = labels is None or not np.array_equal(new, labels)
        labels = new
        centers = _recenter(points, labels, K, tau)
        history.append(_objective(points, labels, centers))
        if not changed:
            break
    return KMeansRun(labels, centers, history[-1], it, history)


def spherical_kmeans(points: np.ndarray, cfg: KMeansConfig) -> Partition:
    """Best of ``cfg.n_init`` restarts by total within-cluster cosine.

    Restart ``r`` draws from its own stream seeded ``(seed, r)``; ties in the
    objective go to the lowest restart index.
    """
    return _best_run(points, cfg)[0]


def _best_run(points, cfg: KMeansConfig):
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if cfg.K > n:
        raise ValueError(f"K = {cfg.K} exceeds the number of points {n}")

    def run(r):
        rng = np.random.default_rng([cfg.seed, r])
        return kmeans_single_run(points, cfg.K, rng, cfg.max_iters, cfg.tau)

    if cfg.workers > 1 and cfg.n_init > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(run, range(cfg.n_init)))
    else:
        runs = [run(r) for r in range(cfg.n_init)]
    best = max(range(len(runs)), key=lambda r: (runs[r].objective, -r))
    chosen = runs[best]
    log.debug("spherical k-means: restart %d won with objective %.6f after %d iterations",
              best, chosen.objective, chosen.iterations)
    return Partition(chosen.labels, cfg.K), chosen


def embed_graph(g: DiGraph, alpha: float = 0.95, T: int = 8, lam: float = 0.5,
                tau: float = DEFAULT_TAU, workers: int = 1) -> FBEmbedding:
    """Forward and backward walks, diffusive profiles, and their FB coordinate."""
    fwd = make_walk_model(g, "forward", alpha)
    bwd = make_walk_model(g, "backward", alpha)
    return build_embedding(green_diffusive(fwd, T, workers),
                           green_diffusive(bwd, T, workers), lam, tau)


def detect_disjoint(g: DiGraph, K: int, alpha: float = 0.95, T: int = 8,
                    lam: float = 0.5, tau: float = DEFAULT_TAU,
                    kmeans_cfg: KMeansConfig | None = None,
                    workers: int = 1) -> tuple[Partition, FBEmbedding]:
    """Cluster the forward-backward Green coordinates of ``g`` into K groups."""
    if kmeans_cfg is None:
        kmeans_cfg = KMeansConfig(K=K, tau=tau, workers=workers)
    elif kmeans_cfg.K != K:
        raise ValueError(f"K = {K} disagrees with kmeans_cfg.K = {kmeans_cfg.K}")
    emb = embed_graph(g, alpha, T, lam, tau, workers)
    return spherical_kmeans(emb.coords, kmeans_cfg), emb
