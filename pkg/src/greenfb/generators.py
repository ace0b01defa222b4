"""Seeded synthetic directed benchmarks with planted communities.

All generators sample each ordered pair ``(u, v)``, ``u != v``, as an
independent Bernoulli trial. Structural draws (sizes, multipliers,
propensities, overlap assignments) come from the stream ``(seed, 0)``;
source row ``u`` draws its edges from the stream ``(seed, 1, u)``, so output
does not depend on how rows are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .communities import Cover, Partition
from .graph import DiGraph, from_arrays


class GeneratorError(ValueError):
    """Raised when a configuration cannot be realized."""


@dataclass(frozen=True)
class GaussPartitionConfig:
    N: int
    K: int
    avg_deg: float
    mu: float
    hetero: float = 0.25
    rho_range: tuple[float, float] = (0.65, 1.55)
    min_size: int = 3
    seed: int = 0


@dataclass(frozen=True)
class DcsbmConfig:
    N: int
    K: int
    avg_deg: float
    mu: float
    theta_range: tuple[float, float] = (0.2, 1.8)
    min_size: int = 3
    seed: int = 0


@dataclass(frozen=True)
class OverlapPpmConfig:
    N: int
    K: int
    avg_deg: float
    mu: float
    o_n: int
    o_m: int = 2
    seed: int = 0


def _check_common(N, K, mu, min_size):
    if K < 1 or N < 1:
        raise GeneratorError("N and K must be positive")
    if K * min_size > N:
        raise GeneratorError(f"cannot fit {K} communities of size >= {min_size} into N = {N}")
    if not 0.0 <= mu < 1.0:
        raise GeneratorError(f"mu must lie in [0, 1), got {mu}")


def _structure_rng(seed):
    return np.random.default_rng([seed, 0])


def _row_rng(seed, u):
    return np.random.default_rng([seed, 1, u])


def round_sizes(weights: np.ndarray, N: int, min_size: int) -> np.ndarray:
    """Scale positive ``weights`` to total ``N``, round by largest remainder,
    then move vertices from the largest community to any below ``min_size``."""
    K = weights.size
    if K * min_size > N:
        raise GeneratorError(f"cannot fit {K} communities of size >= {min_size} into N = {N}")
    raw = weights / weights.sum() * N
    sizes = np.floor(raw).astype(np.int64)
    short = N - sizes.sum()
    # stable order: larger remainder first, then lower index
    order = np.lexsort((np.arange(K), -(raw - sizes)))
    sizes[order[:short]] += 1
    while sizes.min() < min_size:
        small = int(np.argmin(sizes))
        big = int(np.argmax(sizes))
        sizes[big] -= 1
        sizes[small] += 1
    return sizes


def _labels_from_sizes(sizes, rng):
    labels = np.repeat(np.arange(sizes.size), sizes)
    return rng.permutation(labels)


def _sample_rows(N, seed, prob_row):
    """Bernoulli sampling of out-edges row by row; ``prob_row(u)`` returns
    the length-N probability vector for source ``u``."""
    src, dst = [], []
    for u in range(N):
        p = np.clip(prob_row(u), 0.0, 1.0)
        p[u] = 0.0
        hits = np.flatnonzero(_row_rng(seed, u).random(N) < p)
        src.append(np.full(hits.size, u, dtype=np.int64))
        dst.append(hits)
    return from_arrays(N, np.concatenate(src), np.concatenate(dst))


def gen_gauss_partition(cfg: GaussPartitionConfig) -> tuple[DiGraph, Partition]:
    """Heterogeneous Gaussian-size partition graph with per-community density
    multipliers ``rho_c``."""
    N, K, d, mu = cfg.N, cfg.K, cfg.avg_deg, cfg.mu
    _check_common(N, K, mu, cfg.min_size)
    rng = _structure_rng(cfg.seed)
    mean = N / K
    weights = rng.normal(mean, cfg.hetero * mean, size=K)
    weights = np.maximum(weights, cfg.min_size)
    sizes = round_sizes(weights, N, cfg.min_size)
    labels = _labels_from_sizes(sizes, rng)
    lo, hi = cfg.rho_range
    rho = rng.uniform(lo, hi, size=K)

    size_of = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        p_in = np.where(size_of > 1, rho[labels] * (1 - mu) * d / (size_of - 1), 0.0)
        p_out = np.where(size_of < N, mu * d / (N - size_of), 0.0)

    def prob_row(u):
        return np.where(labels == labels[u], p_in[u], p_out[u])

    return _sample_rows(N, cfg.seed, prob_row), Partition(labels, K)


def gen_dcsbm(cfg: DcsbmConfig) -> tuple[DiGraph, Partition]:
    """Directed degree-corrected block model with per-community normalized
    out- and in-propensities."""
    N, K, d, mu = cfg.N, cfg.K, cfg.avg_deg, cfg.mu
    _check_common(N, K, mu, cfg.min_size)
    labels, theta_out, theta_in = dcsbm_propensities(cfg)
    sizes = np.bincount(labels, minlength=K)

    with np.errstate(divide="ignore", invalid="ignore"):
        b_in = np.where(sizes > 1, (1 - mu) * d / (sizes - 1), 0.0)
        b_out = np.where(sizes < N, mu * d / (N - sizes), 0.0)

    def prob_row(u):
        a = labels[u]
        block = np.where(labels == a, b_in[a], b_out[a])
        return theta_out[u] * theta_in * block

    g = _sample_rows(N, cfg.seed, prob_row)
    return g, Partition(labels, K)


def dcsbm_propensities(cfg: DcsbmConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Replay the structural draws of :func:`gen_dcsbm`: ``(labels, theta_out, theta_in)``."""
    rng = _structure_rng(cfg.seed)
    sizes = round_sizes(np.ones(cfg.K), cfg.N, cfg.min_size)
    labels = _labels_from_sizes(sizes, rng)
    lo, hi = cfg.theta_range
    theta_out = rng.uniform(lo, hi, size=cfg.N)
    theta_in = rng.uniform(lo, hi, size=cfg.N)
    for a in range(cfg.K):
        idx = labels == a
        theta_out[idx] *= sizes[a] / theta_out[idx].sum()
        theta_in[idx] *= sizes[a] / theta_in[idx].sum()
    return labels, theta_out, theta_in


def gen_overlap_ppm(cfg: OverlapPpmConfig) -> tuple[DiGraph, Cover, Partition]:
    """Overlapping planted partition.

    Returns the graph, the planted cover, and the primary-community
    partition (the oracle initialization for overlap expansion).
    """
    N, K, d, mu = cfg.N, cfg.K, cfg.avg_deg, cfg.mu
    _check_common(N, K, mu, 1)
    if not 0 <= cfg.o_n <= N:
        raise GeneratorError(f"o_n must lie in [0, N], got {cfg.o_n}")
    if cfg.o_n > 0 and not 2 <= cfg.o_m <= K:
        raise GeneratorError(f"o_m must lie in [2, K], got {cfg.o_m}")
    rng = _structure_rng(cfg.seed)
    sizes = round_sizes(np.ones(K), N, 1)
    primary = _labels_from_sizes(sizes, rng)
    member = np.zeros((N, K), dtype=bool)
    member[np.arange(N), primary] = True
    overlapping = np.sort(rng.choice(N, size=cfg.o_n, replace=False))
    for u in overlapping:
        others = np.setdiff1d(np.arange(K), [primary[u]])
        member[u, rng.choice(others, size=cfg.o_m - 1, replace=False)] = True

    def prob_row(u):
        shares = member[:, member[u]].any(axis=1)
        shares[u] = False
        n_in = int(shares.sum())
        n_out = N - 1 - n_in
        if n_in == 0:
            raise GeneratorError(f"vertex {u} shares a community with no other vertex")
        p_in = (1 - mu) * d / n_in
        p_out = mu * d / n_out if n_out > 0 else 0.0
        return np.where(shares, p_in, p_out)

    g = _sample_rows(N, cfg.seed, prob_row)
    cover = Cover(tuple(tuple(np.flatnonzero(row).tolist()) for row in member), K)
    return g, cover, Partition(primary, K)


def block_constant_graph(sizes, weights) -> tuple[DiGraph, Partition]:
    """Complete weighted graph with ``A[u, v] = weights[a, b]`` for ``u`` in
    block ``a`` and ``v`` in block ``b`` (self-loops included).

    Both the forward and the backward teleported walks on this graph are
    block-constant, so their diffusive Green rows coincide within blocks.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    labels = np.repeat(np.arange(sizes.size), sizes)
    n = labels.size
    src, dst = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    w = weights[labels[src], labels[dst]]
    return from_arrays(n, src.ravel(), dst.ravel(), w.ravel()), Partition(labels, sizes.size)
