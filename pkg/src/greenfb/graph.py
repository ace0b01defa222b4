"""Directed weighted graphs in compressed sparse row form.

Both orientations are stored: ``out_*`` arrays index edges by source and
``in_*`` arrays index the same edges by target, so the edge-reversed graph
is a zero-copy swap.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for malformed graph input."""


@dataclass(frozen=True, eq=False)
class DiGraph:
    n: int
    out_offsets: np.ndarray
    out_targets: np.ndarray
    out_weights: np.ndarray
    in_offsets: np.ndarray
    in_targets: np.ndarray
    in_weights: np.ndarray

    def __post_init__(self):
        for name in ("out_offsets", "out_targets", "out_weights",
                     "in_offsets", "in_targets", "in_weights"):
            getattr(self, name).setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.out_offsets[-1])

    @property
    def total_weight(self) -> float:
        """Total edge weight ``m``."""
        return float(self.out_weights.sum())

    def out_degrees(self) -> np.ndarray:
        """Weighted out-degrees ``k_i^out``."""
        src = np.repeat(np.arange(self.n), np.diff(self.out_offsets))
        return np.bincount(src, weights=self.out_weights, minlength=self.n)

    def in_degrees(self) -> np.ndarray:
        """Weighted in-degrees ``k_j^in``."""
        dst = np.repeat(np.arange(self.n), np.diff(self.in_offsets))
        return np.bincount(dst, weights=self.in_weights, minlength=self.n)

    def edges(self) -> list[tuple[int, int, float]]:
        """Stored edges as ``(src, dst, weight)``, sources then targets ascending."""
        src = np.repeat(np.arange(self.n), np.diff(self.out_offsets))
        return [(int(s), int(t), float(w))
                for s, t, w in zip(src, self.out_targets, self.out_weights)]

    def adjacency(self) -> sp.csr_matrix:
        """The adjacency matrix ``A`` as a scipy CSR matrix."""
        return sp.csr_matrix(
            (self.out_weights, self.out_targets, self.out_offsets),
            shape=(self.n, self.n))

    def same_edges(self, other: "DiGraph") -> bool:
        return (self.n == other.n
                and np.array_equal(self.out_offsets, other.out_offsets)
                and np.array_equal(self.out_targets, other.out_targets)
                and np.array_equal(self.out_weights, other.out_weights))


def _csr(n, rows, cols, weights):
    order = np.lexsort((cols, rows))
    rows, cols, weights = rows[order], cols[order], weights[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
    return offsets, cols.astype(np.int64), weights.astype(np.float64)


def build_graph(n: int, edges: Iterable[Sequence]) -> DiGraph:
    """Build a graph from ``(src, dst[, weight])`` tuples.

    Parallel edges are merged by summing their weights and edges whose merged
    weight is zero are dropped. Self-loops are kept.
    """
    if n < 0:
        raise GraphError(f"vertex count must be nonnegative, got {n}")
    src, dst, w = [], [], []
    for e in edges:
        if len(e) == 2:
            s, t = e
            weight = 1.0
        elif len(e) == 3:
            s, t, weight = e
        else:
            raise GraphError(f"edge must be (src, dst[, weight]), got {e!r}")
        src.append(s)
        dst.append(t)
        w.append(weight)
    return from_arrays(n, np.asarray(src, dtype=np.int64),
                       np.asarray(dst, dtype=np.int64),
                       np.asarray(w, dtype=np.float64))


def from_arrays(n: int, src: np.ndarray, dst: np.ndarray,
                weights: np.ndarray | None = None) -> DiGraph:
    """Vectorized form of :func:`build_graph`."""
    src = np.asarray(src, dtype=np.int64).ravel()
    dst = np.asarray(dst, dtype=np.int64).ravel()
    if weights is None:
        weights = np.ones(src.shape[0])
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if not (src.shape == dst.shape == weights.shape):
        raise GraphError("src, dst and weights must have equal length")
    if src.size:
        bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise GraphError(
                f"edge ({src[i]}, {dst[i]}) has a vertex id outside [0, {n})")
        if not np.all(np.isfinite(weights)):
            raise GraphError("edge weights must be finite")
        if (weights < 0).any():
            raise GraphError("edge weights must be nonnegative")

    # merge parallel edges
    keys = src * max(n, 1) + dst
    uniq, inverse = np.unique(keys, return_inverse=True)
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inverse, weights)
    keep = merged > 0
    uniq, merged = uniq[keep], merged[keep]
    rows, cols = np.divmod(uniq, max(n, 1))

    out = _csr(n, rows, cols, merged)
    inn = _csr(n, cols, rows, merged)
    return DiGraph(n, *out, *inn)


def reverse_view(g: DiGraph) -> DiGraph:
    """The edge-reversed graph (adjacency ``A^T``)."""
    return DiGraph(g.n, g.in_offsets, g.in_targets, g.in_weights,
                   g.out_offsets, g.out_targets, g.out_weights)


def read_edge_list(path: str | os.PathLike | io.TextIOBase,
                   n: int | None = None) -> DiGraph:
    """Read ``src<TAB>dst[<TAB>weight]`` lines.

    ``#`` lines are comments; a ``# n=<int>`` header fixes the vertex count,
    otherwise it is one more than the largest id seen. An explicit ``n``
    argument overrides both.
    """
    if isinstance(path, (str, os.PathLike)):
        with open(path, encoding="utf-8") as fh:
            return read_edge_list(fh, n)
    header_n = None
    src, dst, w = [], [], []
    for lineno, line in enumerate(path, 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().replace(" ", "")
            if body.startswith("n="):
                try:
                    header_n = int(body[2:])
                except ValueError as exc:
                    raise GraphError(f"line {lineno}: bad header {line!r}") from exc
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 2 or 3 fields, got {len(parts)}")
        try:
            src.append(int(parts[0]))
            dst.append(int(parts[1]))
            w.append(float(parts[2]) if len(parts) == 3 else 1.0)
        except ValueError as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
    if n is None:
        n = header_n
    if n is None:
        n = (max(max(src), max(dst)) + 1) if src else 0
    return from_arrays(n, np.array(src, dtype=np.int64),
                       np.array(dst, dtype=np.int64), np.array(w))


def write_edge_list(g: DiGraph, path: str | os.PathLike) -> None:
    """Write the graph with a ``# n=`` header; unit weights are omitted."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# n={g.n}\n")
        for s, t, w in g.edges():
            if w == 1.0:
                fh.write(f"{s}\t{t}\n")
            else:
                fh.write(f"{s}\t{t}\t{w!r}\n")
