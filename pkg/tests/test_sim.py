import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare
from strategies import model_and_point

from reinforce_dyn.equilibria import a_of_beta, w_of_beta
from reinforce_dyn.model import field_F, kernel_pi, make_model, random_model, three_walk_z, two_walk_k2
from reinforce_dyn.sim import (
    THREADS_ENV,
    WalkState,
    audited_step,
    ensemble,
    expected_positive_projection,
    gamma_n,
    init_walks,
    noise_bound_s,
    random_unit_tangent,
    run,
    run_z_walks,
    step,
    tau_n,
    worker_count,
)


def visited(result):
    """Vertex visited at every step, recovered from stride-1 count records."""
    return np.argmax(np.diff(result.sample_counts, axis=0), axis=2)


# -- state and stepping -------------------------------------------------------------------

def test_initial_state():
    model = three_walk_z(2.0)
    state = init_walks(model, 5)
    assert state.n == 0
    assert np.array_equal(state.counts, np.ones((3, 2), dtype=np.int64))
    assert np.array_equal(state.occupation, np.full((3, 2), 0.5))
    assert np.all(state.counts.sum(axis=1) == model.d)


def test_same_seed_same_trajectory():
    model = random_model(np.random.default_rng(0), 3, 3)
    a, b = run(model, 11, 5_000, 100), run(model, 11, 5_000, 100)
    assert np.array_equal(a.sample_counts, b.sample_counts)
    assert np.array_equal(a.martingale_sum, b.martingale_sum)
    assert not np.array_equal(run(model, 12, 5_000, 100).sample_counts, a.sample_counts)


def test_single_steps_match_bulk_run():
    model = random_model(np.random.default_rng(1), 2, 3, scale=3.0)
    state = init_walks(model, 9)
    for _ in range(1_000):
        step(model, state)
    bulk = run(model, 9, 1_000, 10)
    assert np.array_equal(state.counts, bulk.final.counts)
    assert np.array_equal(state.msum, bulk.martingale_sum)


def test_runs_split_across_chunks_are_identical():
    from reinforce_dyn import sim
    model = two_walk_k2(1.0)
    long = run(model, 3, sim.CHUNK + 777, 1000)
    state = init_walks(model, 3)
    sim._advance(model, state, 777)
    sim._advance(model, state, sim.CHUNK)
    assert np.array_equal(long.final.counts, state.counts)


@given(model_and_point(max_scale=5.0), st.integers(0, 2**31), st.integers(1, 300))
@settings(max_examples=30)
def test_counts_conservation(case, seed, n_steps):
    model, _ = case
    res = run(model, seed, n_steps, 1)
    counts = res.sample_counts
    assert np.all(counts >= 1)
    assert np.all(counts.sum(axis=2) == (model.d + res.sample_n)[:, None])
    occ = counts / (model.d + res.sample_n)[:, None, None]
    assert np.max(np.abs(res.samples - occ)) <= 1e-15


def test_zero_interaction_walks_are_uniform_and_independent():
    model = make_model(2, 3)
    moves = visited(run(model, 2024, 100_000, 1))
    for i in range(2):
        freq = np.bincount(moves[:, i], minlength=3)
        assert chisquare(freq).pvalue > 1e-3
    joint = np.bincount(3 * moves[:, 0] + moves[:, 1], minlength=9)
    assert chisquare(joint).pvalue > 1e-3


def test_one_step_frequencies_match_kernel():
    model = random_model(np.random.default_rng(4), 2, 3, scale=2.0)
    frozen = run(model, 0, 50, 50).final
    p = kernel_pi(model, frozen.occupation)
    reps = 100_000
    hits = np.zeros((2, 3))
    rng = np.random.Generator(np.random.Philox(77))
    for _ in range(reps):
        st_ = WalkState(frozen.n, frozen.counts.copy(), frozen.positions.copy(), rng, frozen.msum.copy())
        step(model, st_)
        hits[np.arange(2), st_.positions] += 1
    sigma = np.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(hits / reps - p) < 3 * sigma)


@given(model_and_point(max_scale=10.0), st.integers(0, 2**31))
@settings(max_examples=20)
def test_audited_steps_reconstruct_increment(case, seed):
    model, _ = case
    state = init_walks(model, seed)
    for _ in range(200):
        state, audit = audited_step(model, state)
        assert audit.reconstruction_residual < 1e-14
        assert np.all(audit.xi_n.sum(axis=1) == 1)
        assert audit.gamma_n == 1 / (state.n - 1 + model.d + 1)


# -- step sizes and martingale ----------------------------------------------------------------

def test_step_size_sequence():
    d = 3
    n = np.arange(200_000)
    g = gamma_n(n, d)
    assert g[0] == 1 / (d + 1)
    assert tau_n(n[-1] + 1, d) == pytest.approx(np.sum(g), rel=1e-12)
    squares = np.cumsum(g ** 2)
    assert np.all(np.diff(squares) > 0)
    assert squares[-1] < math.pi ** 2 / 6 + 1
    # the sum diverges like log n
    assert tau_n(10 ** 12, d) - tau_n(10 ** 6, d) == pytest.approx(math.log(10 ** 6), rel=1e-6)


def test_martingale_sum_matches_direct_accumulation():
    model = random_model(np.random.default_rng(8), 3, 2, scale=2.0)
    res = run(model, 1, 2_000, 1)
    moves = visited(res)
    direct = np.zeros((3, 2))
    peak = 0.0
    for k in range(2_000):
        xi = np.zeros((3, 2))
        xi[np.arange(3), moves[k]] = 1
        direct += gamma_n(k, 2) * (xi - kernel_pi(model, res.samples[k]))
        peak = max(peak, np.max(np.abs(direct)))
    assert np.allclose(res.martingale_sum, direct, atol=1e-12)
    assert res.martingale_max_norm == pytest.approx(peak, abs=1e-12)
    # telescoping: X(n) - X(0) = sum gamma_k F(X(k)) + M_n
    drift = sum(gamma_n(k, 2) * field_F(model, res.samples[k]) for k in range(2_000))
    assert np.allclose(res.samples[-1] - res.samples[0], drift + res.martingale_sum, atol=1e-12)


def test_dyadic_increments_shrink():
    res = run(two_walk_k2(4.0), 0, 2 ** 18, 1000)
    assert list(res.checkpoint_n) == [2 ** k for k in range(19)]
    inc = res.dyadic_increments()
    assert np.max(inc[-4:]) < 0.01
    assert np.mean(inc[-4:]) < np.mean(inc[4:8])


def test_subcritical_run_reaches_center():
    assert np.max(np.abs(run(two_walk_k2(1.0), 0, 200_000, 10_000).final.occupation - 0.5)) < 0.02


def test_supercritical_run_reaches_asymmetric_pair():
    a = a_of_beta(4.0)
    x = run(two_walk_k2(4.0), 0, 200_000, 10_000).final.occupation
    q = np.array([[a, 1 - a], [1 - a, a]])
    assert min(np.max(np.abs(x - q)), np.max(np.abs(x - q[:, ::-1]))) < 0.03


def test_run_validation():
    with pytest.raises(ValueError):
        run(two_walk_k2(1.0), 0, 0)


# -- noise bound ------------------------------------------------------------------------------

def test_noise_bound_hand_value(rng):
    model = make_model(2, 2)
    x = rng.dirichlet([1, 1], size=2)
    assert noise_bound_s(model, x) == pytest.approx(1 / 64, abs=1e-17)


def test_enumeration_single_walk_closed_form(rng):
    # one walk on two vertices: E[<theta, U>^+] = pi_1 pi_2 for theta = (1/2, -1/2)
    model = make_model(1, 2, [[[0.7]], [[-1.2]]])
    x = np.array([[0.3, 0.7]])
    p = kernel_pi(model, x)[0]
    theta = np.array([[0.5, -0.5]])
    assert expected_positive_projection(model, x, theta) == pytest.approx(p[0] * p[1], abs=1e-15)


def test_enumeration_matches_monte_carlo():
    rng = np.random.default_rng(3)
    model = random_model(rng, 3, 3, scale=2.0)
    x = rng.dirichlet(np.ones(3), size=3)
    theta = random_unit_tangent(rng, 3, 3)
    p = kernel_pi(model, x)
    cdf = np.cumsum(p, axis=1)
    u = rng.random((400_000, 3, 1))
    moves = np.minimum((u > cdf[None]).sum(axis=2), 2)
    value = theta[np.arange(3), moves].sum(axis=1) - np.sum(theta * p)
    mc = np.maximum(value, 0)
    exact = expected_positive_projection(model, x, theta)
    assert abs(mc.mean() - exact) < 4 * mc.std() / np.sqrt(len(mc))


@given(model_and_point(max_scale=5.0), st.integers(0, 2**31))
def test_noise_bound_below_exact_expectation(case, seed):
    model, x = case
    theta = random_unit_tangent(np.random.default_rng(seed), model.m, model.d)
    s = noise_bound_s(model, x)
    assert s > 0
    assert expected_positive_projection(model, x, theta) >= s


def test_enumeration_size_limit():
    with pytest.raises(ValueError):
        expected_positive_projection(make_model(14, 2), np.full((14, 2), 0.5), np.zeros((14, 2)))


# -- walks on Z ---------------------------------------------------------------------------------

@pytest.mark.parametrize("beta", [0.0, 1.0, 10.0, 100.0])
def test_first_move_is_fair_coin(beta):
    assert np.array_equal(kernel_pi(three_walk_z(beta), np.full((3, 2), 0.5)), np.full((3, 2), 0.5))


def test_z_positions_bookkeeping():
    s0 = (5, -2, 0)
    res = run_z_walks(10.0, 4, 3_000, s0, record_stride=1)
    bulk = run(three_walk_z(10.0), 4, 3_000, 1)
    moves = 2 * visited(bulk) - 1  # vertex 1 -> -1, vertex 2 -> +1
    path = np.vstack([np.zeros((1, 3), dtype=int), np.cumsum(moves, axis=0)]) + np.array(s0)
    assert np.array_equal(res.z_path, path)
    assert res.final.bookkeeping_gap() == 0
    assert np.array_equal(res.final.s, path[-1])


def test_subcritical_z_walks_are_balanced():
    res = run_z_walks(1.0, 0, 500_000)
    assert res.window == 50_000
    assert np.all(np.abs(res.empirical_step_probs - 0.5) < 0.02)


def test_supercritical_z_walks_split():
    target = 1 - 2 * w_of_beta(10.0)
    hits = 0
    for seed in range(5):
        drift = np.sort(run_z_walks(10.0, seed, 1_000_000).drift)
        hits += bool(np.all(np.abs(drift - [-target, 0.0, target]) < 0.05))
    assert hits >= 1


def test_z_walk_validation():
    with pytest.raises(ValueError):
        run_z_walks(-1.0, 0, 10)


# -- ensembles ------------------------------------------------------------------------------------

def test_ensemble_keyed_by_seed_and_order_independent():
    model = two_walk_k2(4.0)

    def final(seed):
        return run(model, seed, 20_000, 20_000).final.counts

    forward = ensemble(final, range(6), workers=3)
    backward = ensemble(final, reversed(range(6)), workers=1)
    assert set(forward) == set(range(6))
    for seed in range(6):
        assert np.array_equal(forward[seed], backward[seed])


def test_ensemble_uses_threads():
    names = ensemble(lambda s: threading.current_thread().name, range(4), workers=2)
    assert all(name != "MainThread" for name in names.values())


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count(5) == 5
