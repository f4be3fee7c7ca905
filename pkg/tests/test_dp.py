import numpy as np
import pytest

from radperc import dp
from radperc.observables import EnsembleAccumulator
from radperc.oracle import exact_density


def test_branching_probs_q2_p0():
    bp = dp.branching_probs(2, 0.0)
    assert (bp.p_both, bp.p_left, bp.p_right, bp.p_none) == (0.6, 0.2, 0.2, 0.0)


def test_branching_probs_q2_p1():
    bp = dp.branching_probs(2, 1.0)
    assert (bp.p_both, bp.p_left, bp.p_right) == (0.0, 0.0, 0.0)
    assert bp.p_none == 1.0


def test_branching_probs_bond_dp_limit():
    for p in (0.0, 0.3, 0.7):
        bp = dp.branching_probs(dp.INFINITY, p)
        assert abs(bp.p_both - (1 - p) ** 2) < 1e-15
        assert abs(bp.p_left - p * (1 - p)) < 1e-15
        assert abs(bp.p_none - p * p) < 1e-15


def test_branching_closure_grid():
    for q in (2, 3, 4, 8, dp.INFINITY):
        for p in np.arange(0.0, 1.0001, 0.1):
            bp = dp.branching_probs(q, float(p))
            assert abs(bp.p_both + bp.p_left + bp.p_right + bp.p_none - 1) < 1e-12
            assert bp.p_left == bp.p_right


def test_branching_probs_validation():
    with pytest.raises(ValueError):
        dp.branching_probs(1, 0.1)
    with pytest.raises(ValueError):
        dp.branching_probs(2, 1.5)


def test_step_absorbing_empty():
    state = dp.LatticeState(np.zeros(8, dtype=bool))
    out = dp.step(state, dp.branching_probs(2, 0.5), np.random.default_rng(0))
    assert not out.occ.any() and out.t == 1 and out.parity == "odd"


def test_step_never_annihilates_at_p0():
    params = dp.branching_probs(2, 0.0)
    rng = np.random.default_rng(1)
    state = dp.initial_state(dp.SingleSite(3), 8)
    for _ in range(200):
        state = dp.step(state, params, rng)
        assert state.alive()


def test_one_step_absorption_probability_hand_value():
    # N=2, q=2, p=0.5: P(empty | one particle) = 3/5*0.25 + 2/5*0.5 = 0.35
    params = dp.branching_probs(2, 0.5)
    assert abs(params.p_none - 0.35) < 1e-15
    rng = np.random.default_rng(2)
    n = 1_000_000
    acc = EnsembleAccumulator(2, 1)
    dp.dp_ensemble_batch(params, 2, 1, n, rng, acc, dp.SingleSite(0))
    dead = 1.0 - acc.alive_count[1] / n
    assert abs(dead - 0.35) < 4 * np.sqrt(0.35 * 0.65 / n)


def test_run_trajectory_initial_summaries():
    res = dp.run_trajectory(dp.SingleSite(4), dp.branching_probs(2, 0.1),
                            16, 8, np.random.default_rng(3))
    assert res["count"][0] == 1
    assert res["alive"][0]
    assert res["sum_x2"][0] == 0


def test_supercritical_absorption_time_size_independent():
    # p = 0.3 > p_c: mean absorption time finite and N-independent
    params = dp.branching_probs(2, 0.3)
    means = []
    for N, seed in ((64, 4), (256, 5)):
        rng = np.random.default_rng(seed)
        times = []
        for _ in range(300):
            res = dp.run_trajectory(dp.SingleSite(0), params, N, 400, rng)
            alive = np.nonzero(res["alive"])[0]
            assert res["alive"][-1] == False or len(alive) == 401
            times.append(alive[-1] + 1)
        means.append(np.mean(times))
    assert abs(means[0] - means[1]) < 8.0  # both O(10), no N trend


def test_monotone_coupling_in_p():
    # ensemble density is non-increasing in p at every t (3 sigma)
    N, depth, n = 32, 24, 20_000
    dens = {}
    sems = {}
    for i, p in enumerate((0.1, 0.2, 0.3)):
        acc = EnsembleAccumulator(N, depth)
        dp.dp_ensemble_batch(dp.branching_probs(2, p), N, depth, n,
                             np.random.default_rng(10 + i), acc, dp.SingleSite(0))
        mean = acc.sum_count / n
        var = acc.sum_count_sq / n - mean ** 2
        dens[p], sems[p] = mean, np.sqrt(var / n)
    for lo, hi in ((0.1, 0.2), (0.2, 0.3)):
        gap = dens[hi] - dens[lo]
        tol = 3 * np.sqrt(sems[lo] ** 2 + sems[hi] ** 2)
        assert np.all(gap <= tol)


def test_mc_matches_markov_oracle_small():
    N, t_max, n = 6, 10, 50_000
    for q, p, seed in ((2, 0.2, 20), (dp.INFINITY, 0.5, 21)):
        acc = EnsembleAccumulator(N, t_max)
        dp.dp_ensemble_batch(dp.branching_probs(q, p), N, t_max, n,
                             np.random.default_rng(seed), acc, dp.SingleSite(0))
        exact = exact_density(N, q, p, dp.SingleSite(0), t_max)
        occ = acc.sum_count / (n * N)
        var = acc.sum_count_sq / n - (acc.sum_count / n) ** 2
        sem = np.sqrt(np.maximum(var, 0) / n) / N + 1e-12
        assert np.all(np.abs(occ - exact["rho"]) < 4.5 * sem + 1e-9)
        surv = acc.alive_count / n
        sem_p = np.sqrt(exact["surv"] * (1 - exact["surv"]) / n) + 1e-12
        assert np.all(np.abs(surv - exact["surv"]) < 4.5 * sem_p + 1e-9)


def test_initial_conditions():
    st = dp.initial_state(dp.Block(3, 5), 16)
    assert set(np.nonzero(st.occ)[0]) == {5, 6, 7}
    st = dp.initial_state(dp.Custom((0, 1, 0, 1)), 4)
    assert set(np.nonzero(st.occ)[0]) == {1, 3}
    with pytest.raises(ValueError):
        dp.initial_state(dp.Custom((0, 0, 0, 0)), 4)
    with pytest.raises(ValueError):
        dp.initial_state(dp.Custom((0, 1)), 4)
