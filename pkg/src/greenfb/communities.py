"""Disjoint partitions, overlapping covers and their text formats.

Partition files hold one ``vertex<TAB>community`` line per vertex in
ascending vertex order. Cover files hold one line per community (ascending
index) listing its member vertex ids, space-separated and ascending.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Partition:
    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ValueError(f"labels must lie in [0, {self.K})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(labels, int(labels.max()) + 1 if labels.size else 0)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def members(self) -> list[np.ndarray]:
        """Vertex ids of each community, ascending."""
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.K + 1))
        return [order[bounds[j]:bounds[j + 1]] for j in range(self.K)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def to_cover(self) -> "Cover":
        return Cover(tuple((int(c),) for c in self.labels), self.K)


@dataclass(frozen=True, eq=False)
class Cover:
    memberships: tuple[tuple[int, ...], ...]
    K: int

    def __post_init__(self):
        norm = []
        for u, ms in enumerate(self.memberships):
            ms = tuple(sorted(set(int(j) for j in ms)))
            if ms and (ms[0] < 0 or ms[-1] >= self.K):
                raise ValueError(f"vertex {u} has a community outside [0, {self.K})")
            norm.append(ms)
        object.__setattr__(self, "memberships", tuple(norm))

    @classmethod
    def from_communities(cls, communities, n: int) -> "Cover":
        ms: list[list[int]] = [[] for _ in range(n)]
        for j, comm in enumerate(communities):
            for u in comm:
                if not 0 <= u < n:
                    raise ValueError(f"vertex {u} outside [0, {n})")
                ms[u].append(j)
        return cls(tuple(tuple(m) for m in ms), len(communities))

    @property
    def n(self) -> int:
        return len(self.memberships)

    def communities(self) -> list[list[int]]:
        comms: list[list[int]] = [[] for _ in range(self.K)]
        for u, ms in enumerate(self.memberships):
            for j in ms:
                comms[j].append(u)
        return comms

    def membership_matrix(self) -> np.ndarray:
        """Boolean ``n x K`` indicator matrix."""
        out = np.zeros((self.n, self.K), dtype=bool)
        for u, ms in enumerate(self.memberships):
            out[u, list(ms)] = True
        return out

    def overlapping_vertices(self) -> set[int]:
        return {u for u, ms in enumerate(self.memberships) if len(ms) >= 2}


def as_cover(x) -> Cover:
    """View a Partition, Cover or plain label sequence as a Cover."""
    if isinstance(x, Cover):
        return x
    if not isinstance(x, Partition):
        x = Partition.from_labels(x)
    return x.to_cover()


def write_partition(p: Partition, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u, c in enumerate(p.labels):
            fh.write(f"{u}\t{c}\n")


def read_partition(path: str | os.PathLike, K: int | None = None) -> Partition:
    """Read a partition file. Every vertex in ``[0, n)`` must appear once."""
    pairs = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'vertex<TAB>community', got {line!r}")
            u, c = int(parts[0]), int(parts[1])
            if u in pairs:
                raise ValueError(f"{path}:{lineno}: vertex {u} listed twice")
            pairs[u] = c
    n = len(pairs)
    if set(pairs) != set(range(n)):
        raise ValueError(f"{path}: vertex ids must be exactly 0..{n - 1}")
    labels = np.array([pairs[u] for u in range(n)], dtype=np.int64)
    if K is None:
        return Partition.from_labels(labels)
    return Partition(labels, K)


def write_cover(c: Cover, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for comm in c.communities():
            fh.write(" ".join(str(u) for u in comm) + "\n")


def read_cover(path: str | os.PathLike, n: int | None = None) -> Cover:
    """Read a community-per-line cover file.

    ``n`` defaults to one more than the largest vertex id present.
    """
    comms = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            comms.append([int(tok) for tok in line.split()])
    while comms and not comms[-1]:
        comms.pop()
    if not comms:
        raise ValueError(f"{path}: empty cover")
    if n is None:
        n = max((max(c) for c in comms if c), default=-1) + 1
    return Cover.from_communities(comms, n)
