import numpy as np
import pytest
from hypothesis import given, strategies as st

from greenfb.graph import build_graph, from_arrays
from greenfb.markov import (ConvergenceError, SizeCapError, apply_transition,
                            diagnostic_coordinates, fundamental_matrix, green_diffusive,
                            green_full, hitting_times, make_walk_model)
from greenfb.reproduce import first_step_hitting_times

from conftest import dense_teleported, digraphs, random_digraph, stationary_eig

alphas = st.sampled_from([0.5, 0.85, 0.9, 0.95])


def test_two_node_hand_values():
    # single edge 0 -> 1, alpha = 1/2; vertex 1 dangles
    m = make_walk_model(build_graph(2, [(0, 1)]), alpha=0.5)
    np.testing.assert_allclose(m.pi, [0.4, 0.6], atol=1e-12)
    H = hitting_times(m)
    np.testing.assert_allclose(H, [[0.0, 4 / 3], [2.0, 0.0]], atol=1e-10)


def test_two_cycle_green_hand_values():
    m = make_walk_model(build_graph(2, [(0, 1), (1, 0)]), alpha=0.5)
    np.testing.assert_allclose(green_diffusive(m, 2).rows,
                               [[-0.125, 0.125], [0.125, -0.125]], atol=1e-14)
    np.testing.assert_allclose(green_full(m), np.array([[1, -1], [-1, 1]]) / 3, atol=1e-12)


def test_dangling_everywhere_is_uniform():
    m = make_walk_model(build_graph(4, []), alpha=0.9)
    np.testing.assert_allclose(m.pi, 0.25)
    np.testing.assert_allclose(green_diffusive(m, 3).rows, 0.0, atol=1e-15)


@given(digraphs(), alphas)
def test_dense_transition_matches_oracle(g, alpha):
    m = make_walk_model(g, alpha=alpha)
    P = dense_teleported(g.adjacency().toarray(), alpha)
    np.testing.assert_allclose(m.dense_transition(), P, atol=1e-14)
    np.testing.assert_allclose(m.dense_transition().sum(axis=1), 1.0, atol=1e-13)


@given(digraphs(), alphas)
def test_stationary_matches_eigenvector(g, alpha):
    m = make_walk_model(g, alpha=alpha)
    P = dense_teleported(g.adjacency().toarray(), alpha)
    np.testing.assert_allclose(m.pi, stationary_eig(P), atol=1e-10)
    assert np.all(m.pi > 0)
    assert m.pi.sum() == pytest.approx(1.0, abs=1e-12)


@given(digraphs(), alphas)
def test_backward_walk_uses_transpose(g, alpha):
    m = make_walk_model(g, "backward", alpha)
    P = dense_teleported(g.adjacency().toarray().T, alpha)
    np.testing.assert_allclose(m.dense_transition(), P, atol=1e-14)


@given(digraphs(), alphas, st.integers(0, 2**31 - 1))
def test_apply_transition_matches_dense(g, alpha, seed):
    m = make_walk_model(g, alpha=alpha)
    x = np.random.default_rng(seed).normal(size=(3, g.n))
    P = m.dense_transition()
    np.testing.assert_allclose(apply_transition(m, x), x @ P, atol=1e-12)
    np.testing.assert_allclose(apply_transition(m, x[0]), x[0] @ P, atol=1e-12)


@given(digraphs(), alphas, st.integers(1, 10))
def test_diffusive_profile_matches_matrix_powers(g, alpha, T):
    m = make_walk_model(g, alpha=alpha)
    P = dense_teleported(g.adjacency().toarray(), alpha)
    pi = stationary_eig(P)
    expected = sum(np.linalg.matrix_power(P, t) - pi[None, :] for t in range(1, T + 1))
    rows = green_diffusive(m, T).rows
    np.testing.assert_allclose(rows, expected, atol=1e-10)
    np.testing.assert_allclose(rows.sum(axis=1), 0.0, atol=1e-10)


def test_diffusive_independent_of_workers_and_blocks(rng):
    g = random_digraph(300, rng, p=0.02)
    m = make_walk_model(g, alpha=0.95)
    ref = green_diffusive(m, 8).rows
    for workers, block in [(4, 256), (3, 7), (1, 1000)]:
        np.testing.assert_array_equal(green_diffusive(m, 8, workers, block).rows, ref)


@given(digraphs(), alphas)
def test_green_full_is_neumann_limit(g, alpha):
    m = make_walk_model(g, alpha=alpha)
    P = dense_teleported(g.adjacency().toarray(), alpha)
    Pi = np.tile(stationary_eig(P), (g.n, 1))
    # series sum_{t>=0}(P^t - Pi) = sum_t (P - Pi)^t - Pi, truncated where alpha^t is negligible
    series = np.eye(g.n) - Pi
    term = np.eye(g.n)
    for _ in range(int(np.ceil(np.log(1e-15) / np.log(alpha)))):
        term = term @ (P - Pi)
        series += term
    np.testing.assert_allclose(green_full(m), series, atol=1e-8)


@given(digraphs(max_n=9), alphas)
def test_hitting_times_match_first_step_analysis(g, alpha):
    m = make_walk_model(g, alpha=alpha)
    np.testing.assert_allclose(hitting_times(m), first_step_hitting_times(m.dense_transition()),
                               rtol=1e-9, atol=1e-9)


def test_diagnostic_modes(rng):
    m = make_walk_model(random_digraph(20, rng), alpha=0.9)
    H = diagnostic_coordinates(m, "raw_ht")
    C = diagnostic_coordinates(m, "centered_ht")
    # raw rows are a shared baseline minus the centered rows
    baseline = H + C
    np.testing.assert_allclose(baseline, np.tile(baseline[0], (20, 1)), atol=1e-8)
    with pytest.raises(ValueError):
        diagnostic_coordinates(m, "other")


def test_size_cap():
    m = make_walk_model(build_graph(6, [(0, 1)]), alpha=0.9)
    with pytest.raises(SizeCapError):
        fundamental_matrix(m, cap=5)
    with pytest.raises(SizeCapError):
        hitting_times(m, cap=5)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        make_walk_model(build_graph(2, [(0, 1)]), alpha=alpha)


def test_bad_direction_and_T():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        make_walk_model(g, "sideways")
    m = make_walk_model(g)
    for T in (0, -1, 2.5):
        with pytest.raises(ValueError):
            green_diffusive(m, T)


def test_convergence_error_reported():
    g = from_arrays(3, np.array([0, 0, 1]), np.array([1, 2, 0]))
    with pytest.raises(ConvergenceError):
        make_walk_model(g, alpha=0.999, tol=1e-300, max_iters=3)
