"""Agreement and quality metrics for partitions and covers.

Conventions:

* NMI divides mutual information by the arithmetic mean of the two label
  entropies.
* Pair F1 counts an unordered pair as positive when the two vertices share
  at least one community, so it applies to partitions and covers alike.
* ONMI is the max-normalized overlapping NMI of McDaid, Greene and Hurley.
* Overlap F1 is the F1 score of the predicted set of multi-membership
  vertices against the true set.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .communities import Cover, Partition, as_cover
from .graph import DiGraph


@dataclass(frozen=True)
class DisjointReport:
    nmi: float
    ari: float
    pair_f1: float
    q_dir: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class OverlapReport:
    onmi: float
    pair_f1: float
    overlap_f1: float
    score: float

    def as_dict(self) -> dict:
        return asdict(self)


def _labels(p) -> np.ndarray:
    return p.labels if isinstance(p, Partition) else np.asarray(p, dtype=np.int64)


def _contingency(a, b) -> np.ndarray:
    a, b = _labels(a), _labels(b)
    if a.shape != b.shape:
        raise ValueError(f"partitions cover {a.size} and {b.size} vertices")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1 if ai.size else 0, bi.max() + 1 if bi.size else 0))
    np.add.at(table, (ai, bi), 1.0)
    return table


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Normalized mutual information (arithmetic-mean normalization)."""
    table = _contingency(a, b)
    n = table.sum()
    if n == 0:
        raise ValueError("empty partitions")
    ha, hb = _entropy(table.sum(axis=1)), _entropy(table.sum(axis=0))
    if ha == 0.0 and hb == 0.0:
        return 1.0
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    nz = table > 0
    pab = table[nz] / n
    mi = float((pab * np.log(pab / np.outer(pa, pb)[nz])).sum())
    return float(np.clip(mi / (0.5 * (ha + hb)), 0.0, 1.0))


def ari(a, b) -> float:
    """Hubert-Arabie adjusted Rand index."""
    table = _contingency(a, b)
    n = table.sum()

    def pairs(x):
        return float((x * (x - 1) / 2).sum())

    index = pairs(table)
    sa, sb = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    total = n * (n - 1) / 2
    expected = sa * sb / total if total else 0.0
    top = 0.5 * (sa + sb)
    if top == expected:
        return 1.0
    return (index - expected) / (top - expected)


def _co_membership(c: Cover) -> sp.csr_matrix:
    rows, cols = [], []
    for u, ms in enumerate(c.memberships):
        rows.extend([u] * len(ms))
        cols.extend(ms)
    m = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(c.n, max(c.K, 1)))
    co = (m @ m.T).tocsr()
    co = sp.triu(co, k=1).tocsr()
    co.data[:] = 1.0
    co.eliminate_zeros()
    return co


def pair_counts(pred: Partition | Cover, truth: Partition | Cover) -> tuple[int, int, int]:
    """``(true positive, predicted positive, actual positive)`` counts over vertex pairs."""
    p, t = as_cover(pred), as_cover(truth)
    if p.n != t.n:
        raise ValueError(f"inputs cover {p.n} and {t.n} vertices")
    cp, ct = _co_membership(p), _co_membership(t)
    tp = int(cp.multiply(ct).sum())
    return tp, int(cp.sum()), int(ct.sum())


def _f1(tp: float, n_pred: float, n_true: float) -> float:
    if n_pred == 0 and n_true == 0:
        return 1.0
    if tp == 0:
        return 0.0
    return 2.0 * tp / (n_pred + n_true)


def pair_f1(pred: Partition | Cover, truth: Partition | Cover) -> float:
    return _f1(*pair_counts(pred, truth))


def q_dir(g: DiGraph, p: Partition) -> float:
    """Leicht-Newman directed modularity with ``1/m`` normalization."""
    m = g.total_weight
    if m <= 0:
        raise ValueError("directed modularity is undefined on a graph without edges")
    labels = _labels(p)
    if labels.size != g.n:
        raise ValueError(f"partition has {labels.size} vertices, graph has {g.n}")
    K = int(labels.max()) + 1 if labels.size else 0
    src = np.repeat(np.arange(g.n), np.diff(g.out_offsets))
    same = labels[src] == labels[g.out_targets]
    internal = np.bincount(labels[src[same]], weights=g.out_weights[same], minlength=K)
    kout = np.bincount(labels, weights=g.out_degrees(), minlength=K)
    kin = np.bincount(labels, weights=g.in_degrees(), minlength=K)
    return float((internal.sum() - (kout * kin).sum() / m) / m)


def _h(w, n):
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = -w[pos] * np.log2(w[pos] / n)
    return out


def _conditional_entropies(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-community ``H(X_k | Y)`` and ``H(X_k)`` for indicator matrices ``x``, ``y``."""
    n = x.shape[0]
    xs = x.sum(axis=0).astype(np.float64)
    ys = y.sum(axis=0).astype(np.float64)
    d = (x.T.astype(np.float64) @ y.astype(np.float64))  # |X_k & Y_l|
    b = xs[:, None] - d
    c = ys[None, :] - d
    a = n - b - c - d
    hx = _h(xs, n) + _h(n - xs, n)
    hy = _h(ys, n) + _h(n - ys, n)
    joint = _h(a, n) + _h(b, n) + _h(c, n) + _h(d, n)
    cond = joint - hy[None, :]
    # only informative matches count; otherwise fall back to H(X_k)
    valid = (_h(a, n) + _h(d, n)) >= (_h(b, n) + _h(c, n))
    cond = np.where(valid, cond, hx[:, None])
    if cond.shape[1] == 0:
        return hx.copy(), hx
    return np.minimum(cond.min(axis=1), hx), hx


def onmi(a: Partition | Cover, b: Partition | Cover) -> float:
    """Overlapping NMI, max-normalized (McDaid, Greene and Hurley)."""
    ca, cb = as_cover(a), as_cover(b)
    if ca.n != cb.n:
        raise ValueError(f"covers span {ca.n} and {cb.n} vertices")
    if ca.n == 0 or ca.K == 0 or cb.K == 0:
        raise ValueError("empty cover")
    x = ca.membership_matrix()
    y = cb.membership_matrix()
    x = x[:, x.any(axis=0)]
    y = y[:, y.any(axis=0)]
    hxy, hx = _conditional_entropies(x, y)
    hyx, hy = _conditional_entropies(y, x)
    HX, HY = hx.sum(), hy.sum()
    denom = max(HX, HY)
    if denom == 0.0:
        return 1.0
    mutual = 0.5 * (HX - hxy.sum() + HY - hyx.sum())
    return float(np.clip(mutual / denom, 0.0, 1.0))


def overlap_f1(pred: Partition | Cover, truth: Partition | Cover) -> float:
    p, t = as_cover(pred), as_cover(truth)
    if p.n != t.n:
        raise ValueError(f"covers span {p.n} and {t.n} vertices")
    sp_, st = p.overlapping_vertices(), t.overlapping_vertices()
    return _f1(len(sp_ & st), len(sp_), len(st))


def overlap_score(onmi_value: float, pair_f1_value: float, overlap_f1_value: float) -> float:
    return (onmi_value + pair_f1_value + overlap_f1_value) / 3.0


def disjoint_report(pred: Partition, truth: Partition, g: DiGraph | None = None) -> DisjointReport:
    return DisjointReport(nmi(pred, truth), ari(pred, truth), pair_f1(pred, truth),
                          q_dir(g, pred) if g is not None else None)


def overlap_report(pred: Cover, truth: Cover) -> OverlapReport:
    o, pf, of = onmi(pred, truth), pair_f1(pred, truth), overlap_f1(pred, truth)
    return OverlapReport(o, pf, of, overlap_score(o, pf, of))
