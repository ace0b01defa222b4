"""Teleported random walks and their Green operators.

The teleported matrix ``P_alpha = alpha * P~ + (1 - alpha) / n * 1 1^T`` is
dense, so it is never materialized on the main path. Right-multiplication by
``P_alpha`` is one sparse product with the row-normalized adjacency plus two
rank-one corrections (dangling rows and teleportation).

Dense solves (:func:`green_full`, :func:`hitting_times`,
:func:`diagnostic_coordinates`) are diagnostic and capped in size.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .graph import DiGraph, reverse_view

log = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]

DENSE_CAP = 5000


class ConvergenceError(RuntimeError):
    """The stationary solver did not reach its tolerance."""


class SizeCapError(ValueError):
    """A dense diagnostic was requested on a graph above the size cap."""


@dataclass(frozen=True, eq=False)
class WalkModel:
    graph: DiGraph
    direction: Direction
    alpha: float
    dangling: np.ndarray
    pi: np.ndarray
    pi_residual: float
    iterations: int
    # transpose of the row-normalized matrix (dangling rows left empty)
    _pt_transpose: sp.csr_matrix = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    def dense_transition(self) -> np.ndarray:
        """``P_alpha`` as a dense array (tests and diagnostics only)."""
        n = self.n
        p = self._pt_transpose.T.toarray()
        p[self.dangling, :] = 1.0 / n
        return self.alpha * p + (1.0 - self.alpha) / n


def _oriented(g: DiGraph, direction: Direction) -> DiGraph:
    if direction == "forward":
        return g
    if direction == "backward":
        return reverse_view(g)
    raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")


def _transpose_operator(g: DiGraph) -> tuple[sp.csr_matrix, np.ndarray]:
    deg = g.out_degrees()
    dangling = np.flatnonzero(deg <= 0)
    counts = np.diff(g.out_offsets)
    scale = np.repeat(np.where(deg > 0, deg, 1.0), counts)
    ptilde = sp.csr_matrix((g.out_weights / scale, g.out_targets, g.out_offsets),
                           shape=(g.n, g.n))
    return ptilde.T.tocsr(), dangling


def make_walk_model(g: DiGraph, direction: Direction = "forward", alpha: float = 0.95,
                    tol: float = 1e-12, max_iters: int = 100_000) -> WalkModel:
    """Build the teleported walk on ``g`` (or its reversal) and its stationary law.

    The stationary distribution is found by power iteration on the transpose
    operator from the uniform start, stopping once the L1 fixed-point
    residual drops to ``tol``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if g.n == 0:
        raise ValueError("graph has no vertices")
    og = _oriented(g, direction)
    pt_t, dangling = _transpose_operator(og)
    n = og.n

    def step(pi):
        # pi^T P_alpha, returned as a flat vector
        nxt = alpha * (pt_t @ pi)
        nxt += (alpha * pi[dangling].sum() + (1.0 - alpha) * pi.sum()) / n
        return nxt

    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(1, max_iters + 1):
        nxt = step(pi)
        residual = float(np.abs(nxt - pi).sum())
        if residual <= tol:
            break
        pi = nxt / nxt.sum()
    else:
        raise ConvergenceError(
            f"stationary solver stopped after {max_iters} iterations with "
            f"L1 residual {residual:.3e} > tol {tol:.1e}")
    pi.setflags(write=False)
    dangling.setflags(write=False)
    return WalkModel(g, direction, float(alpha), dangling, pi, residual, it, pt_t)


def apply_transition(model: WalkModel, m: np.ndarray) -> np.ndarray:
    """Right-multiply the rows of ``m`` by ``P_alpha``."""
    m = np.asarray(m, dtype=np.float64)
    squeeze = m.ndim == 1
    m = np.atleast_2d(m)
    n = model.n
    if m.shape[1] != n:
        raise ValueError(f"matrix has {m.shape[1]} columns, walk has {n} states")
    a = model.alpha
    out = (model._pt_transpose @ m.T).T
    out *= a
    shift = (1.0 - a) * m.sum(axis=1)
    if model.dangling.size:
        shift += a * m[:, model.dangling].sum(axis=1)
    out += (shift / n)[:, None]
    return out[0] if squeeze else out


@dataclass(frozen=True, eq=False)
class GreenProfileSet:
    source_model: WalkModel
    T: int
    rows: np.ndarray


def _diffusive_block(model: WalkModel, sources: np.ndarray, T: int) -> np.ndarray:
    n = model.n
    power = np.zeros((sources.size, n))
    power[np.arange(sources.size), sources] = 1.0
    acc = np.zeros_like(power)
    for _ in range(T):
        power = apply_transition(model, power)
        acc += power
    acc -= T * model.pi[None, :]
    return acc


def green_diffusive(model: WalkModel, T: int, workers: int = 1,
                    block_rows: int = 256) -> GreenProfileSet:
    """Diffusive truncated Green profiles ``sum_{t=1..T} (P^t - 1 pi^T)``.

    Source rows are processed in fixed blocks; each row's arithmetic is
    independent of the block it falls in, so the result does not depend on
    ``workers``.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"truncation length T must be a positive integer, got {T}")
    T = int(T)
    n = model.n
    starts = list(range(0, n, block_rows))
    blocks = [np.arange(s, min(s + block_rows, n)) for s in starts]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _diffusive_block(model, b, T), blocks))
    else:
        parts = [_diffusive_block(model, b, T) for b in blocks]
    rows = np.vstack(parts) if parts else np.zeros((0, n))
    rows.setflags(write=False)
    return GreenProfileSet(model, T, rows)


def _check_cap(model: WalkModel, cap: int):
    if model.n > cap:
        raise SizeCapError(
            f"dense Green diagnostics are capped at n <= {cap}, graph has n = {model.n}")


def fundamental_matrix(model: WalkModel, cap: int = DENSE_CAP) -> np.ndarray:
    """``Z = (I - P_alpha + 1 pi^T)^{-1}`` via a dense LU solve."""
    _check_cap(model, cap)
    n = model.n
    system = np.eye(n) - model.dense_transition() + model.pi[None, :]
    try:
        lu = scipy.linalg.lu_factor(system, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise RuntimeError(f"internal error: fundamental system is singular ({exc})") from exc
    z = scipy.linalg.lu_solve(lu, np.eye(n))
    if not np.all(np.isfinite(z)):
        raise RuntimeError("internal error: fundamental system is singular")
    return z


def green_full(model: WalkModel, cap: int = DENSE_CAP) -> np.ndarray:
    """Exact centered Green operator ``Z - 1 pi^T``."""
    return fundamental_matrix(model, cap) - model.pi[None, :]


def hitting_times(model: WalkModel, cap: int = DENSE_CAP) -> np.ndarray:
    """Expected hitting times ``H[i, k] = (Z_kk - Z_ik) / pi_k``, zero diagonal."""
    z = fundamental_matrix(model, cap)
    h = (np.diag(z)[None, :] - z) / model.pi[None, :]
    np.fill_diagonal(h, 0.0)
    return h


def diagnostic_coordinates(model: WalkModel, mode: str, cap: int = DENSE_CAP) -> np.ndarray:
    """Rows for the hitting-time ablation.

    ``raw_ht`` gives the raw hitting-time rows ``H_i``; ``centered_ht`` gives
    the baseline-free rows ``G_i. / pi`` of the exact Green operator.
    """
    if mode == "raw_ht":
        return hitting_times(model, cap)
    if mode == "centered_ht":
        return green_full(model, cap) / model.pi[None, :]
    raise ValueError(f"unknown diagnostic mode {mode!r}; expected raw_ht or centered_ht")
