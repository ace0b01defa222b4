"""Desk-scale acceptance suite.

Each ``check_*`` function runs one criterion end to end and returns a
:class:`CheckResult`. The same functions back ``tests/test_acceptance.py``
and the ``greenfb reproduce`` command, so the two can never drift apart.

Benchmark cells average over ``seeds`` graphs (3 by default, to keep the
suite within minutes).
"""

from __future__ import annotations

import logging
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cluster import (KMeansConfig, assign_to_centers, detect_disjoint, embed_graph,
                      spherical_kmeans)
from .communities import Cover, Partition
from .embed import normalize_rows
from .generators import (GaussPartitionConfig, OverlapPpmConfig, block_constant_graph,
                         gen_gauss_partition, gen_overlap_ppm)
from .graph import DiGraph, from_arrays
from .markov import diagnostic_coordinates, green_diffusive, green_full, make_walk_model
from .metrics import ari, nmi, overlap_report, pair_f1, q_dir
from .overlap import OverlapParams, assign_memberships, expand_overlap

log = logging.getLogger(__name__)

DEFAULT_SEEDS = 3


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] {self.number:2d} {self.name}: {parts} ({self.seconds:.1f}s)"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# ---------------------------------------------------------------------------
# random fixtures

def random_graph(n: int, rng: np.random.Generator, density: float | None = None,
                 weighted: bool = True) -> DiGraph:
    """Sparse random digraph with a few dangling vertices and random weights."""
    if density is None:
        density = min(1.0, 4.0 / n)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    # make a handful of vertices dangling to exercise the uniform-row rule
    mask[rng.choice(n, size=max(1, n // 10), replace=False)] = False
    src, dst = np.nonzero(mask)
    w = rng.uniform(0.5, 2.0, size=src.size) if weighted else None
    return from_arrays(n, src, dst, w)


def chain_suite(count: int = 20, seed: int = 2024):
    """``count`` random teleported chains cycling through the size and alpha grid."""
    rng = np.random.default_rng(seed)
    sizes, alphas = (10, 50, 200), (0.5, 0.9, 0.95)
    out = []
    for i in range(count):
        n = sizes[i % 3]
        alpha = alphas[(i // 3) % 3]
        out.append(make_walk_model(random_graph(n, rng), "forward", alpha))
    return out


# ---------------------------------------------------------------------------
# criteria 1-6: properties of the operators and decision rules

def check_poisson(count: int = 20) -> CheckResult:
    """Poisson identities of the centered Green operator."""
    t0 = time.perf_counter()
    worst = 0.0
    for model in chain_suite(count):
        n = model.n
        P = model.dense_transition()
        G = green_full(model)
        Pi = np.tile(model.pi, (n, 1))
        eye = np.eye(n)
        res = [
            np.abs(G @ np.ones(n)).max(),
            np.abs(model.pi @ G).max(),
            np.abs((eye - P) @ G - (eye - Pi)).max(),
            np.abs(G @ (eye - P) - (eye - Pi)).max(),
        ]
        worst = max(worst, *res)
    secs = time.perf_counter() - t0
    return CheckResult(1, "Poisson identities", worst <= 1e-8 and secs < 30,
                       {"max_residual": worst, "chains": count}, secs)


def check_truncation(count: int = 20, Ts=(1, 4, 8)) -> CheckResult:
    """Row-wise l1 truncation bound of the diffusive profile."""
    t0 = time.perf_counter()
    worst_ratio = 0.0
    for model in chain_suite(count):
        n = model.n
        G_tail = green_full(model) - (np.eye(n) - model.pi[None, :])
        for T in Ts:
            err = np.abs(G_tail - green_diffusive(model, T).rows).sum(axis=1).max()
            bound = 2.0 * model.alpha ** (T + 1) / (1.0 - model.alpha)
            worst_ratio = max(worst_ratio, err / bound)
    secs = time.perf_counter() - t0
    return CheckResult(2, "Truncation bound", worst_ratio <= 1.0 and secs < 30,
                       {"max_error_over_bound": worst_ratio}, secs)


def first_step_hitting_times(P: np.ndarray) -> np.ndarray:
    """Hitting times from first-step analysis, one linear system per target.

    Independent of the fundamental matrix: ``H[i, k] = 1 + sum_{j != k} P[i, j] H[j, k]``.
    """
    n = P.shape[0]
    H = np.zeros((n, n))
    for k in range(n):
        keep = np.arange(n) != k
        sub = P[np.ix_(keep, keep)]
        H[keep, k] = np.linalg.solve(np.eye(n - 1) - sub, np.ones(n - 1))
    return H


def check_hitting_decomposition(count: int = 10, n: int = 50, seed: int = 7) -> CheckResult:
    """Hitting-time rows equal a common baseline minus the centered Green rows."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        alpha = (0.5, 0.9, 0.95)[i % 3]
        model = make_walk_model(random_graph(n, rng), "forward", alpha)
        G = green_full(model)
        h = np.diag(G) / model.pi
        decomposed = h[None, :] - G / model.pi[None, :]
        worst = max(worst, np.abs(decomposed - first_step_hitting_times(model.dense_transition())).max())
    secs = time.perf_counter() - t0
    return CheckResult(3, "Hitting-time decomposition", worst <= 1e-8,
                       {"max_abs_error": worst}, secs)


def check_gram_psd(count: int = 10, n: int = 50, seed: int = 11) -> CheckResult:
    """The forward-backward cosine Gram matrix is positive semidefinite."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    smallest = np.inf
    for i in range(count):
        g = random_graph(n, rng)
        e = embed_graph(g, alpha=0.9, T=1 + i % 8, lam=float(rng.uniform()))
        smallest = min(smallest, float(np.linalg.eigvalsh(e.gram()).min()))
    secs = time.perf_counter() - t0
    return CheckResult(4, "Kernel PSD", smallest >= -1e-8,
                       {"min_eigenvalue": smallest}, secs)


def block_fixture(K: int, n: int = 200, seed: int = 0):
    """Block-constant weighted graph with ``K`` unequal blocks and distinct rows."""
    rng = np.random.default_rng([seed, K])
    base = np.full(K, n // K)
    base[: n - base.sum()] += 1
    shift = rng.integers(-n // (4 * K), n // (4 * K) + 1, size=K)
    shift -= shift.sum() // K
    sizes = base + shift
    sizes[0] += n - sizes.sum()
    weights = rng.uniform(0.05, 0.3, size=(K, K)) + np.diag(rng.uniform(2.0, 4.0, size=K))
    return block_constant_graph(sizes, weights)


def check_block_separation(Ks=(2, 4), n: int = 200) -> CheckResult:
    """Block-constant graphs give identical within-block coordinates and exact recovery."""
    t0 = time.perf_counter()
    min_cos, min_nmi = 1.0, 1.0
    for K in Ks:
        g, truth = block_fixture(K, n)
        p, e = detect_disjoint(g, K)
        gram = e.gram()
        same = truth.labels[:, None] == truth.labels[None, :]
        min_cos = min(min_cos, float(gram[same].min()))
        min_nmi = min(min_nmi, nmi(p, truth))
    secs = time.perf_counter() - t0
    return CheckResult(5, "Block separation", min_cos >= 1 - 1e-9 and min_nmi == 1.0,
                       {"min_within_cos": min_cos, "min_nmi": min_nmi}, secs)


def margin_points(labels: np.ndarray, K: int, gamma: float, rng: np.random.Generator):
    """Unit points and unit centers with ``<z_u, m_a> >= <z_u, m_b> + gamma``.

    Built from an explicit Gram factorization: centers are the first ``K``
    standard basis vectors and point ``u`` gets its prescribed center
    similarities plus a private orthogonal direction that completes its norm.
    """
    n = labels.size
    sims = rng.uniform(-0.3, 0.3, size=(n, K))
    own = rng.uniform(0.35, 0.65, size=n)
    sims = np.minimum(sims, own[:, None] - gamma - rng.uniform(0, 0.05, size=(n, K)))
    sims[np.arange(n), labels] = own
    rest = 1.0 - (sims ** 2).sum(axis=1)
    if rest.min() < 0:
        raise ValueError("fixture similarities exceed unit norm")
    points = np.zeros((n, K + n))
    points[:, :K] = sims
    points[np.arange(n), K + np.arange(n)] = np.sqrt(rest)
    centers = np.eye(K, K + n)
    return points, centers


def margin_cover_fixture(n: int, K: int, gamma: float, rng: np.random.Generator):
    """Scores and thresholds separating true from false memberships by ``gamma``."""
    primary = rng.integers(K, size=n)
    truth = np.zeros((n, K), dtype=bool)
    truth[np.arange(n), primary] = True
    extra = rng.random((n, K)) < 0.15
    truth |= extra
    thresholds = rng.uniform(-0.2, 0.8, size=K)
    gap = rng.uniform(0.0, 0.3, size=(n, K))
    scores = np.where(truth, thresholds + gamma + gap, thresholds - gamma - gap)
    return Partition(primary, K), truth, scores, thresholds


def check_margin_fixtures(gamma: float = 0.1, noise: float = 0.04, trials: int = 20,
                          seed: int = 5) -> CheckResult:
    """Margin hypotheses imply exact assignment, exact cover recovery, and stability."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    assign_ok = cover_ok = stable_ok = True
    for _ in range(trials):
        K = int(rng.integers(2, 9))
        labels = rng.integers(K, size=120)
        points, centers = margin_points(labels, K, gamma, rng)
        s = points @ centers.T
        own = s[np.arange(labels.size), labels]
        other = np.where(np.eye(K, dtype=bool)[labels], -np.inf, s).max(axis=1)
        assert np.all(own - other >= gamma - 1e-12)
        assign_ok &= bool(np.array_equal(assign_to_centers(points, centers), labels))

        p, truth, scores, thresholds = margin_cover_fixture(150, K, gamma, rng)
        cover = assign_memberships(p, scores, thresholds)
        cover_ok &= bool(np.array_equal(cover.membership_matrix(), truth))
        ds = rng.uniform(-noise, noise, size=scores.shape)
        dt = rng.uniform(-noise, noise, size=thresholds.shape)
        noisy = assign_memberships(p, scores + ds, thresholds + dt)
        stable_ok &= bool(np.array_equal(noisy.membership_matrix(), truth))
    secs = time.perf_counter() - t0
    return CheckResult(6, "Margin fixtures", assign_ok and cover_ok and stable_ok,
                       {"assignment": assign_ok, "cover": cover_ok, "stability": stable_ok,
                        "gamma": gamma, "noise": 2 * noise}, secs)


# ---------------------------------------------------------------------------
# criteria 7-9: desk-scale benchmarks

def diagnose_d0(g: DiGraph, truth: Partition, K: int, seed: int = 0,
                workers: int = 1) -> dict:
    """NMI of spherical K-means on raw hitting-time rows, centered Green rows,
    and the forward-backward diffusive embedding."""
    cfg = KMeansConfig(K=K, seed=seed, workers=workers)
    model = make_walk_model(g, "forward", 0.95)
    out = {}
    for mode in ("raw_ht", "centered_ht"):
        coords = normalize_rows(diagnostic_coordinates(model, mode))
        out[mode] = nmi(spherical_kmeans(coords, cfg), truth)
    p, _ = detect_disjoint(g, K, kmeans_cfg=cfg, workers=workers)
    out["fb_green"] = nmi(p, truth)
    return out


def check_d0(seeds: int = DEFAULT_SEEDS, workers: int = 1, N: int = 500, K: int = 8,
             avg_deg: float = 10.0) -> CheckResult:
    t0 = time.perf_counter()
    means = {}
    for mu in (0.1, 0.2, 0.3):
        rows = []
        for s in range(seeds):
            g, truth = gen_gauss_partition(GaussPartitionConfig(N, K, avg_deg, mu, seed=s))
            rows.append(diagnose_d0(g, truth, K, seed=s, workers=workers))
        means[mu] = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
        log.info("D0 mu=%.1f: %s", mu, means[mu])
    secs = time.perf_counter() - t0
    fb = [means[mu]["fb_green"] for mu in (0.1, 0.2, 0.3)]
    raw03 = means[0.3]["raw_ht"]
    ok = (fb[0] >= 0.95 and fb[1] >= 0.95 and fb[2] >= 0.90
          and raw03 <= fb[2] - 0.2 and secs < 300)
    return CheckResult(7, "D0 Green vs hitting time", ok,
                       {"fb_nmi": fb, "raw_ht_nmi_mu0.3": raw03,
                        "centered_ht_nmi": [means[mu]["centered_ht"] for mu in (0.1, 0.2, 0.3)],
                        "seeds": seeds}, secs)


def check_d1a(seeds: int = DEFAULT_SEEDS, workers: int = 1) -> CheckResult:
    t0 = time.perf_counter()
    scores = []
    for s in range(seeds):
        g, truth = gen_gauss_partition(GaussPartitionConfig(1000, 8, 5.0, 0.1, seed=s))
        p, _ = detect_disjoint(g, 8, kmeans_cfg=KMeansConfig(K=8, seed=s, workers=workers),
                               workers=workers)
        scores.append(nmi(p, truth))
    secs = time.perf_counter() - t0
    mean = float(np.mean(scores))
    return CheckResult(8, "D1a disjoint detection", mean >= 0.95 and secs < 300,
                       {"mean_nmi": mean, "seeds": seeds}, secs)


def o1_cell(mu: float, seed: int, N: int = 500, K: int = 8, avg_deg: float = 10.0,
            workers: int = 1) -> dict:
    """One oracle-initialized overlap run; returns the overlap report as a dict."""
    g, cover, primary = gen_overlap_ppm(
        OverlapPpmConfig(N, K, avg_deg, mu, o_n=int(0.15 * N), o_m=2, seed=seed))
    e = embed_graph(g, alpha=0.90, T=10, lam=0.5, workers=workers)
    pred = expand_overlap(primary, e, OverlapParams())
    return overlap_report(pred, cover).as_dict()


def check_o1(seeds: int = DEFAULT_SEEDS, workers: int = 1) -> CheckResult:
    t0 = time.perf_counter()
    means = {}
    for mu in (0.1, 0.3):
        means[mu] = float(np.mean([o1_cell(mu, s, workers=workers)["score"]
                                   for s in range(seeds)]))
    secs = time.perf_counter() - t0
    ok = means[0.1] >= 0.90 and means[0.3] >= 0.75 and secs < 300
    return CheckResult(9, "O1 oracle overlap", ok,
                       {"score_mu0.1": means[0.1], "score_mu0.3": means[0.3],
                        "seeds": seeds}, secs)


# ---------------------------------------------------------------------------
# criteria 10-11

def check_metric_sanity(seed: int = 3) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    labels = rng.integers(5, size=60)
    p = Partition(labels, 5)
    same = [nmi(p, p), ari(p, p), pair_f1(p, p)]
    g = from_arrays(60, rng.integers(60, size=300), rng.integers(60, size=300))
    q_single = q_dir(g, Partition(np.zeros(60, dtype=np.int64), 1))
    cover = Cover(tuple(tuple(sorted(set([int(c), int(rng.integers(5))]))) for c in labels), 5)
    rep = overlap_report(cover, cover).as_dict()
    two_cycle = from_arrays(2, np.array([0, 1]), np.array([1, 0]))
    q_split = q_dir(two_cycle, Partition(np.array([0, 1]), 2))
    ok = (all(v == 1.0 for v in same) and q_single == 0.0
          and all(v == 1.0 for v in rep.values()) and q_split == -0.5)
    secs = time.perf_counter() - t0
    return CheckResult(10, "Metric sanity", ok,
                       {"identical_partition": same, "q_single": q_single,
                        "identical_cover": list(rep.values()), "q_two_cycle_split": q_split},
                       secs)


def _cli(args: list[str], cwd: Path) -> subprocess.CompletedProcess:
    cmd = [sys.executable, "-m", "greenfb.cli", *args]
    return subprocess.run(cmd, cwd=cwd, capture_output=True, text=True, check=False)


def cli_artifacts(workdir: Path, workers: int) -> dict[str, bytes]:
    """Run every subcommand once in ``workdir`` and collect its outputs by name."""
    w = ["--workers", str(workers)]
    steps = [
        ["generate", "--model", "gauss", "--n", "300", "--k", "4", "--avg-deg", "8",
         "--mu", "0.2", "--seed", "3", "--edges-out", "g.tsv", "--truth-out", "g.truth"],
        ["generate", "--model", "dcsbm", "--n", "300", "--k", "4", "--avg-deg", "8",
         "--mu", "0.2", "--seed", "3", "--edges-out", "d.tsv", "--truth-out", "d.truth"],
        ["generate", "--model", "overlap-ppm", "--n", "300", "--k", "4", "--avg-deg", "8",
         "--mu", "0.1", "--overlap-frac", "0.15", "--memberships", "2", "--seed", "3",
         "--edges-out", "o.tsv", "--truth-out", "o.cover", "--primary-out", "o.primary"],
        ["detect", "--edges", "g.tsv", "--k", "4", "--seed", "3", "--out", "g.pred",
         "--save-embedding", "g.emb", *w],
        ["detect", "--edges", "g.tsv", "--sweep-k", "3,4,5", "--seed", "3", "--out", "g.sweep",
         *w],
        ["overlap", "--edges", "o.tsv", "--partition", "o.primary", "--out", "o.pred", *w],
        ["eval", "--mode", "disjoint", "--pred", "g.pred", "--truth", "g.truth",
         "--edges", "g.tsv"],
        ["eval", "--mode", "overlap", "--pred", "o.pred", "--truth", "o.cover"],
        ["diagnose-d0", "--n", "200", "--k", "4", "--avg-deg", "8", "--mu", "0.2",
         "--seed", "3", *w],
        ["reproduce", "--only", "10", *w],
    ]
    out: dict[str, bytes] = {}
    for i, step in enumerate(steps):
        res = _cli(step, workdir)
        if res.returncode != 0:
            raise RuntimeError(f"greenfb {' '.join(step)} failed: {res.stderr.strip()}")
        stdout = res.stdout
        if step[0] == "reproduce":
            # runtimes are the only nondeterministic part of the report
            stdout = "\n".join(line.rsplit(" (", 1)[0] for line in stdout.splitlines())
        out[f"stdout_{i}_{step[0]}"] = stdout.encode()
        out[f"stderr_{i}_{step[0]}"] = res.stderr.encode()
    for f in sorted(workdir.iterdir()):
        out[f.name] = f.read_bytes()
    return out


def check_determinism(worker_counts=(1, 4)) -> CheckResult:
    """Every subcommand twice per worker count: byte-identical files and output."""
    t0 = time.perf_counter()
    runs = []
    with tempfile.TemporaryDirectory() as tmp:
        for w in worker_counts:
            for rep in range(2):
                d = Path(tmp) / f"w{w}_r{rep}"
                d.mkdir()
                runs.append(cli_artifacts(d, w))
    ref = runs[0]
    mismatched = sorted({k for r in runs[1:] for k in set(ref) | set(r)
                         if ref.get(k) != r.get(k)})
    secs = time.perf_counter() - t0
    return CheckResult(11, "CLI determinism", not mismatched,
                       {"artifacts": len(ref), "mismatched": mismatched or "none",
                        "worker_counts": list(worker_counts)}, secs)


# ---------------------------------------------------------------------------

def run_all(only=None, seeds: int = DEFAULT_SEEDS, workers: int = 1) -> list[CheckResult]:
    checks = {
        1: check_poisson,
        2: check_truncation,
        3: check_hitting_decomposition,
        4: check_gram_psd,
        5: check_block_separation,
        6: check_margin_fixtures,
        7: lambda: check_d0(seeds, workers),
        8: lambda: check_d1a(seeds, workers),
        9: lambda: check_o1(seeds, workers),
        10: check_metric_sanity,
        11: check_determinism,
    }
    wanted = sorted(checks) if only is None else sorted(only)
    unknown = [c for c in wanted if c not in checks]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; choose from 1-11")
    return [checks[c]() for c in wanted]


if __name__ == "__main__":  # pragma: no cover
    for r in run_all(workers=os.cpu_count() or 1):
        print(r.line())
