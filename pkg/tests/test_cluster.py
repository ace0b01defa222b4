import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenfb.cluster import (KMeansConfig, _best_run, assign_to_centers, detect_disjoint,
                             kmeans_single_run, kmeanspp_init, spherical_kmeans)
from greenfb.generators import GaussPartitionConfig, gen_gauss_partition
from greenfb.metrics import ari, nmi
from greenfb.reproduce import block_fixture, margin_points


def _unit(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def test_kmeanspp_saturates_at_K_equals_n(rng):
    pts = _unit(rng.normal(size=(6, 3)))
    idx = kmeanspp_init(pts, 6, np.random.default_rng(0))
    assert sorted(idx) == list(range(6))


def test_kmeanspp_antipodal_pair_is_forced():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0]])
    for s in range(10):
        assert sorted(kmeanspp_init(pts, 2, np.random.default_rng(s))) == [0, 1]


def test_kmeanspp_skips_duplicates_then_falls_back():
    pts = np.array([[1.0, 0.0]] * 3 + [[0.0, 1.0]])
    for s in range(10):
        idx = kmeanspp_init(pts, 2, np.random.default_rng(s))
        assert {0, 1, 2} & set(idx) and 3 in idx
    # all identical: uniform fallback still returns distinct indices
    idx = kmeanspp_init(np.tile([[0.0, 1.0]], (4, 1)), 4, np.random.default_rng(1))
    assert sorted(idx) == [0, 1, 2, 3]


def test_kmeanspp_K_too_large():
    with pytest.raises(ValueError):
        kmeanspp_init(np.eye(2), 3, np.random.default_rng(0))


def test_assignment_ties_go_to_lowest_center():
    pts = np.array([[1.0, 0.0]])
    centers = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
    assert assign_to_centers(pts, centers)[0] == 1


def test_duplicate_groups_recovered_exactly(rng):
    base = _unit(rng.normal(size=(4, 5)))
    labels = rng.permutation(np.repeat(np.arange(4), 5))
    p, run = _best_run(base[labels], KMeansConfig(K=4, seed=3))
    assert ari(p, labels) == 1.0
    assert run.objective == pytest.approx(20.0)


def test_single_point():
    pt = np.array([[0.6, 0.8]])
    p, run = _best_run(pt, KMeansConfig(K=1))
    assert p.labels.tolist() == [0]
    np.testing.assert_allclose(run.centers, pt)


def test_K_one_and_K_too_large(rng):
    pts = _unit(rng.normal(size=(7, 3)))
    assert spherical_kmeans(pts, KMeansConfig(K=1)).labels.tolist() == [0] * 7
    with pytest.raises(ValueError):
        spherical_kmeans(pts, KMeansConfig(K=8))
    for bad in ({"K": 0}, {"K": 2, "max_iters": 0}, {"K": 2, "n_init": 0}):
        with pytest.raises(ValueError):
            KMeansConfig(**bad)


@given(st.integers(0, 2**31 - 1), st.integers(2, 6))
def test_objective_monotone_and_no_empty_clusters(seed, K):
    rng = np.random.default_rng(seed)
    pts = _unit(rng.normal(size=(40, 4)))
    run = kmeans_single_run(pts, K, np.random.default_rng(seed))
    assert all(b >= a - 1e-9 for a, b in zip(run.history, run.history[1:]))
    assert np.bincount(run.labels, minlength=K).min() >= 1


@given(st.integers(0, 2**31 - 1))
def test_margin_fixture_assignment_recovers_labels(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 7))
    labels = rng.integers(K, size=50)
    pts, centers = margin_points(labels, K, 0.1, rng)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0)
    np.testing.assert_array_equal(assign_to_centers(pts, centers), labels)


def test_deterministic_and_worker_independent(rng):
    pts = _unit(rng.normal(size=(200, 6)))
    a = spherical_kmeans(pts, KMeansConfig(K=5, seed=9))
    b = spherical_kmeans(pts, KMeansConfig(K=5, seed=9, workers=4))
    np.testing.assert_array_equal(a.labels, b.labels)


def test_best_restart_wins(rng):
    pts = _unit(rng.normal(size=(120, 3)))
    cfg = KMeansConfig(K=6, seed=2, n_init=5)
    _, best = _best_run(pts, cfg)
    singles = [kmeans_single_run(pts, 6, np.random.default_rng([2, r])) for r in range(5)]
    assert best.objective == max(s.objective for s in singles)


@pytest.mark.parametrize("K", [2, 3, 4])
def test_block_constant_graph_exact(K):
    g, truth = block_fixture(K, 90)
    p, e = detect_disjoint(g, K)
    assert nmi(p, truth) == 1.0
    same = truth.labels[:, None] == truth.labels[None, :]
    assert e.gram()[same].min() >= 1 - 1e-9


def test_relabeling_does_not_change_scores(rng):
    g, truth = gen_gauss_partition(GaussPartitionConfig(200, 4, 8, 0.2, seed=1))
    p, _ = detect_disjoint(g, 4)
    perm = rng.permutation(4)
    assert nmi(perm[p.labels], truth) == pytest.approx(nmi(p, truth))
    assert ari(perm[p.labels], truth) == pytest.approx(ari(p, truth))


def test_detect_rejects_mismatched_cfg():
    g, _ = block_fixture(2, 20)
    with pytest.raises(ValueError):
        detect_disjoint(g, 2, kmeans_cfg=KMeansConfig(K=3))


def test_gauss_benchmark_easy_regime():
    g, truth = gen_gauss_partition(GaussPartitionConfig(400, 4, 10, 0.1, seed=0))
    p, _ = detect_disjoint(g, 4)
    assert nmi(p, truth) >= 0.95
