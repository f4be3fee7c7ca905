import numpy as np
import pytest

from radperc.clifford import layer_pairs, layer_parity
from radperc.oracle import FullTableau, random_script, run_script
from radperc.stabilizer import (GeneratorSet, InitCase, StabilizerEnsemble,
                                geometric_record_times, info_trajectories)

CASES = (InitCase.MIXED_S2_MIXED_E, InitCase.PURE_S2_MIXED_E, InitCase.PURE_ALL)


def test_init_row_counts():
    assert GeneratorSet(InitCase.MIXED_S2_MIXED_E, 4, 2).d_total == 4
    assert GeneratorSet(InitCase.PURE_S2_MIXED_E, 4, 2).d_total == 6
    g = GeneratorSet(InitCase.PURE_ALL, 4, 4)
    assert g.d_total == 8  # k = N: no S2 generators
    with pytest.raises(ValueError):
        GeneratorSet(InitCase.MIXED_S2_MIXED_E, 4, 0)
    with pytest.raises(ValueError):
        GeneratorSet(InitCase.MIXED_S2_MIXED_E, 4, 5)


def test_initial_entropies_case_i():
    k, N = 3, 6
    g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, N, k)
    assert g.entropy("E") == 0
    assert g.entropy("AE") == k
    info = g.coherent_info()
    assert info.I_c_E == -k
    assert info.I_c_S == k
    # A is maximally entangled with S1 at t=0: one bit per Bell pair
    assert g.entropy("A") == k
    g1 = GeneratorSet(InitCase.MIXED_S2_MIXED_E, 2, 1)
    assert g1.entropy("A") == 1


def test_swap_on_site_without_as_content_only_zeroes_perp():
    g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, 4, 1)
    g.apply_swap(0)  # Bell content at site 0 leaves AS
    labels_before = g.as_label.copy()
    g.apply_swap(2)  # no AS row has content at site 2
    assert np.array_equal(g.as_label, labels_before)
    assert g.n_env == 2


def test_case_iii_bell_swap_example():
    # Bell pair on (A1, S1), swap S1: both rows deleted, fresh Z row appears,
    # and the reference qubit is left maximally mixed (H_A = 1)
    g = GeneratorSet(InitCase.PURE_ALL, 2, 1)
    rows_before = g.d_total
    g.apply_swap(0)
    assert g.entropy("A") == 1
    assert g.entropy("S") == 0  # swapped-in |0> qubit is pure
    assert g.d_total == rows_before - 2 + 1 + 0  # two pivots out, one Z row in


def test_entropies_match_full_tracking_oracle():
    rng = np.random.default_rng(42)
    for trial in range(24):
        N = int(rng.choice([4, 6, 8]))
        k = int(rng.integers(1, N + 1))
        case = CASES[trial % 3]
        script = random_script(N, int(rng.integers(1, 9)),
                               float(rng.choice([0.15, 0.35])), rng)
        g, f = GeneratorSet(case, N, k), FullTableau(case, N, k)
        run_script(g, script)
        run_script(f, script)
        g.check_invariants()
        for region in ("A", "S", "AS", "E", "AE", "SE"):
            assert g.entropy(region) == f.entropy(region), (trial, case, region)


def test_decode_fidelity_t0_and_full_radiation():
    k, N = 1, 4
    g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, N, k)
    assert g.decode_fidelity() == 0.25  # 2^{-2k} at t=0
    for site in range(N):
        g.apply_swap(site)
    assert g.decode_fidelity() == 1.0  # all Bell rows radiated


def test_decode_fidelity_requires_case_i():
    g = GeneratorSet(InitCase.PURE_S2_MIXED_E, 4, 2)
    with pytest.raises(ValueError):
        g.decode_fidelity()


def test_fidelity_monotone_along_realization():
    rng = np.random.default_rng(7)
    g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, 8, 4)
    last = g.decode_log2_fidelity()
    for t in range(1, 40):
        g.apply_gate_layer(layer_parity(t), rng)
        g.apply_swap_round(0.25, rng)
        cur = g.decode_log2_fidelity()
        assert cur >= last
        last = cur


def test_purity_fidelity_identity_exact():
    rng = np.random.default_rng(8)
    for k in (1, 4):
        g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, 8, k)
        for t in range(1, 30):
            g.apply_gate_layer(layer_parity(t), rng)
            g.apply_swap_round(0.2, rng)
            purity, _, _ = g.purity_identities()  # raises on violation
            assert (g.n_env - k) - g.entropy("AE") == g.decode_log2_fidelity()
        assert purity == 2.0 ** (-g.entropy("AE"))


def test_coherent_info_identity_case_i():
    # I_c(A>E) = k + log2 F holds per realization
    rng = np.random.default_rng(9)
    g = GeneratorSet(InitCase.MIXED_S2_MIXED_E, 8, 8)
    for t in range(1, 50):
        g.apply_gate_layer(layer_parity(t), rng)
        g.apply_swap_round(0.3, rng)
        info = g.coherent_info()
        assert info.I_c_E == g.k + g.decode_log2_fidelity()


def test_case_iii_saturation_and_pure_decoder():
    rng = np.random.default_rng(10)
    g = GeneratorSet(InitCase.PURE_ALL, 8, 8)
    for t in range(1, 120):
        g.apply_gate_layer(layer_parity(t), rng)
        g.apply_swap_round(0.1, rng)
    info = g.coherent_info()
    assert info.I_c_E == g.k
    assert info.F_pure == 1.0
    # purification: once all references are radiated, A is maximally mixed
    assert info.H_A == g.k


def test_postselection_probability_scaling():
    # -log2 P_succ ~ (1-p)N + k at late times (tested at k = N, within 20%)
    N = k = 64
    p, depth, n_real = 0.15, 192, 40
    ens = StabilizerEnsemble(InitCase.PURE_ALL, N, k, n_real)
    rng = np.random.default_rng(11)
    for t in range(1, depth + 1):
        ens.apply_gate_layer(layer_parity(t), rng)
        ens.apply_swap_round(p, rng)
    neg_log2_p_succ = (N - k) + ens.entropies("E")
    target = (1 - p) * N + k
    assert abs(neg_log2_p_succ.mean() - target) < 0.2 * target


def test_purity_identities_case_ii_rejected():
    g = GeneratorSet(InitCase.PURE_S2_MIXED_E, 4, 2)
    with pytest.raises(ValueError):
        g.purity_identities()


def test_ensemble_matches_single_scripted():
    rng = np.random.default_rng(12)
    for case in CASES:
        N, k, depth, p, B = 6, 2, 6, 0.3, 4
        scripts = [random_script(N, depth, p, np.random.default_rng(500 + b))
                   for b in range(B)]
        singles = [GeneratorSet(case, N, k) for _ in range(B)]
        ens = StabilizerEnsemble(case, N, k, B)
        for t in range(depth):
            parity = scripts[0][t][0]
            ens.apply_gate_layer(parity,
                                 gate_indices=np.array([s[t][1] for s in scripts]))
            mask = np.zeros((B, N), dtype=bool)
            for b, script in enumerate(scripts):
                for pair, gidx in zip(layer_pairs(N, parity), script[t][1]):
                    singles[b].apply_gate(pair, gidx)
                for site in script[t][2]:
                    mask[b, site] = True
                    singles[b].apply_swap(site)
            ens.apply_swap_round(p, swap_mask=mask)
        for region in ("A", "S", "AS", "E", "AE"):
            want = np.array([s.entropy(region) for s in singles])
            assert np.array_equal(ens.entropies(region), want), (case, region)
        if case is InitCase.MIXED_S2_MIXED_E:
            want = np.array([s.decode_log2_fidelity() for s in singles])
            assert np.array_equal(ens.decode_log2_fidelity(), want)


def test_info_trajectories_initial_values():
    res = info_trajectories(InitCase.MIXED_S2_MIXED_E, 8, 4, 0.2, 4, 3,
                            np.random.default_rng(13), [0, 4])
    assert np.all(res["Ic_E"][:, 0] == -4)
    assert np.all(res["Ic_S"][:, 0] == 4)
    assert np.all(res["log2_F"][:, 0] == -8)


def test_geometric_record_times():
    ts = geometric_record_times(100)
    assert ts[0] == 0 and ts[-1] == 100
    assert all(a < b for a, b in zip(ts, ts[1:]))
