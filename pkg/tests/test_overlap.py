import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenfb.communities import Partition
from greenfb.embed import FBEmbedding
from greenfb.overlap import (OverlapParams, assign_memberships, community_scores,
                             community_threshold, compute_thresholds, expand_overlap,
                             internal_cosine_quantile, nearest_rank_quantile,
                             top_fraction_size, vertex_community_score)
from greenfb.reproduce import margin_cover_fixture


def _emb(coords):
    coords = np.asarray(coords, dtype=float)
    return FBEmbedding(coords.shape[0], 0.5, 1e-12, coords, np.zeros(coords.shape[0], bool))


def _random_emb(rng, n, d=4):
    x = rng.normal(size=(n, d))
    return _emb(x / np.linalg.norm(x, axis=1, keepdims=True))


def test_nearest_rank_hand_values():
    assert nearest_rank_quantile(np.array([0.9, 0.6, 0.8, 0.7]), 0.1) == 0.6
    assert nearest_rank_quantile(np.array([0.9, 0.6, 0.8, 0.7]), 0.5) == 0.7
    assert nearest_rank_quantile(np.array([0.9, 0.6, 0.8, 0.7]), 1.0) == 0.9
    assert nearest_rank_quantile(np.array([0.9, 0.6, 0.8, 0.7]), 0.0) == 0.6
    # 0.1 * 30 is 3.0000000000000004 in binary; the rank must still be 3
    vals = np.arange(30, dtype=float)
    assert nearest_rank_quantile(vals, 0.1) == 2.0


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.floats(0, 1))
def test_quantile_against_sorting_oracle(vals, q):
    vals = np.array(vals)
    k = max(1, int(np.ceil(round(q * vals.size, 9))))
    assert nearest_rank_quantile(vals, q) == np.sort(vals)[k - 1]


def test_internal_quantile_cases(rng):
    e = _random_emb(rng, 6)
    assert internal_cosine_quantile([2], e, 0.1) is None
    assert internal_cosine_quantile([], e, 0.1) is None
    members = [0, 2, 5]
    pairs = [e.coords[u] @ e.coords[v] for u, v in itertools.combinations(members, 2)]
    assert internal_cosine_quantile(members, e, 0.1) == pytest.approx(min(pairs))
    same = _emb(np.tile([0.6, 0.8], (4, 1)))
    assert internal_cosine_quantile([0, 1, 2, 3], same, 0.3) == pytest.approx(1.0)


def test_threshold_formula():
    p = OverlapParams()
    assert community_threshold(0.6, p) == pytest.approx(0.55)
    assert community_threshold(-0.9, p) == -0.4
    assert community_threshold(None, p) == -0.4
    assert community_threshold(0.6, OverlapParams(epsilon=0.1)) == pytest.approx(0.65)


def test_top_fraction_and_score():
    assert top_fraction_size(10, 0.2) == 2
    assert top_fraction_size(3, 0.01) == 1
    assert top_fraction_size(5, 1.0) == 5
    coords = np.zeros((11, 11))
    coords[0, 0] = 1.0
    cos = np.linspace(-0.9, 0.9, 10)
    for i, c in enumerate(cos, start=1):
        coords[i, 0], coords[i, i] = c, np.sqrt(1 - c * c)
    e = _emb(coords)
    members = np.arange(1, 11)
    assert vertex_community_score(0, members, e, 0.2) == pytest.approx((cos[-1] + cos[-2]) / 2)
    assert vertex_community_score(0, members, e, 1e-6) == pytest.approx(cos[-1])
    with pytest.raises(ValueError):
        vertex_community_score(0, [], e, 0.2)


@given(st.integers(0, 2**31 - 1), st.floats(0.05, 1.0))
def test_vectorized_scores_match_scalar(seed, eta):
    rng = np.random.default_rng(seed)
    e = _random_emb(rng, 15)
    members = np.sort(rng.choice(15, size=int(rng.integers(1, 10)), replace=False))
    s = community_scores(e, members, eta)
    for u in range(15):
        assert s[u] == pytest.approx(vertex_community_score(u, members, e, eta), abs=1e-12)


@given(st.integers(0, 2**31 - 1))
def test_margin_fixture_exact_and_stable(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 7))
    p, truth, scores, thresholds = margin_cover_fixture(60, K, 0.1, rng)
    assert np.array_equal(assign_memberships(p, scores, thresholds).membership_matrix(), truth)
    ds = rng.uniform(-0.049, 0.049, size=scores.shape)
    dt = rng.uniform(-0.049, 0.049, size=thresholds.shape)
    noisy = assign_memberships(p, scores + ds, thresholds + dt)
    assert np.array_equal(noisy.membership_matrix(), truth)


def test_assign_shape_check():
    p = Partition(np.array([0, 1]), 2)
    with pytest.raises(ValueError):
        assign_memberships(p, np.zeros((2, 3)), np.zeros(2))


def _fixture(seed, n=30, K=3):
    rng = np.random.default_rng(seed)
    labels = np.concatenate([np.arange(K), rng.integers(K, size=n - K)])
    return Partition(labels, K), _random_emb(rng, n)


def test_unreachable_thresholds_return_partition():
    p, e = _fixture(0)
    cover = expand_overlap(p, e, OverlapParams(theta_min=1.1))
    assert cover.memberships == p.to_cover().memberships


@given(st.integers(0, 2**31 - 1))
def test_expand_matches_bruteforce_rule(seed):
    p, e = _fixture(seed)
    params = OverlapParams(q=0.2, delta=0.1, eta=0.3)
    cover = expand_overlap(p, e, params)
    members = p.members()
    for u in range(p.n):
        expect = {int(p.labels[u])}
        for j, m in enumerate(members):
            if j == p.labels[u]:
                continue
            theta = community_threshold(internal_cosine_quantile(m, e, params.q), params)
            if vertex_community_score(u, m, e, params.eta) >= theta:
                expect.add(j)
        assert set(cover.memberships[u]) == expect


@given(st.integers(0, 2**31 - 1), st.floats(-1, 1), st.floats(0, 0.5))
def test_monotone_in_theta_min_and_delta(seed, t, d):
    p, e = _fixture(seed)
    lo = expand_overlap(p, e, OverlapParams(theta_min=t)).membership_matrix()
    hi = expand_overlap(p, e, OverlapParams(theta_min=t + 0.2)).membership_matrix()
    assert np.all(hi <= lo)
    small = expand_overlap(p, e, OverlapParams(delta=d)).membership_matrix()
    large = expand_overlap(p, e, OverlapParams(delta=d + 0.1)).membership_matrix()
    assert np.all(small <= large)
    assert np.all(lo[np.arange(p.n), p.labels])


def test_singleton_community_threshold_floor():
    p, e = _fixture(1)
    labels = p.labels.copy()
    labels[0] = 3
    q = Partition(labels, 4)
    assert compute_thresholds(q, e, OverlapParams())[3] == -0.4


def test_idempotent(rng):
    p, e = _fixture(5)
    a = expand_overlap(p, e)
    assert a.memberships == expand_overlap(p, e).memberships


@pytest.mark.parametrize("kw", [{"q": 1.5}, {"delta": -0.1}, {"eta": 0.0}, {"eta": 1.2}])
def test_param_ranges(kw):
    with pytest.raises(ValueError):
        OverlapParams(**kw)


def test_size_mismatch():
    p, e = _fixture(0)
    with pytest.raises(ValueError):
        expand_overlap(Partition(np.zeros(3, dtype=np.int64), 1), e)
