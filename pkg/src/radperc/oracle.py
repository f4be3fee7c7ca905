"""Brute-force ground truths at desk scale.

Three independent references used only by the test-suite:

* exact Markov evolution of the particle process (probability vector over all
  2^N edge configurations, factorized per vertex);
* dense-matrix conjugation through explicit 4x4 Clifford unitaries, one
  representative per symplectic action, found by closure over {H, S, CZ};
* a stabilizer tableau that tracks every environment ancilla explicitly, with
  one extra column per swap event, plus an enumeration-based entropy that
  counts subgroup elements directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .clifford import TwoQubitClifford, layer_pairs, layer_parity
from .dp import BranchingParams, InitialCondition, initial_state
from .pauli import PauliLetter, PauliString
from .stabilizer import InitCase

MAX_MARKOV_N = 14
MAX_DENSE_QUBITS = 3
MAX_TABLEAU_N = 8


# ----------------------------------------------------------------------
# Exact Markov chain of the particle process
# ----------------------------------------------------------------------

def pair_kernel(params: BranchingParams) -> np.ndarray:
    """4x4 vertex transition matrix over (left, right) edge-pair states.

    Pair state index = 2*left + right.  An empty input pair stays empty;
    an occupied one emits (both, left, right, none) with the branching
    probabilities.
    """
    K = np.zeros((4, 4))
    K[0, 0] = 1.0
    for s in (1, 2, 3):
        K[s, 3] = params.p_both
        K[s, 2] = params.p_left    # left edge only -> state 2*1+0
        K[s, 1] = params.p_right
        K[s, 0] = params.p_none
    return K


class MarkovKernel:
    """One-layer transition operator, applied factor-by-factor per vertex."""

    def __init__(self, N: int, params: BranchingParams):
        if N > MAX_MARKOV_N:
            raise ValueError(f"exact kernel limited to N <= {MAX_MARKOV_N}")
        if N % 2:
            raise ValueError("N must be even")
        self.N = N
        self.params = params
        self.K = pair_kernel(params)

    def step(self, dist: np.ndarray, parity: str) -> np.ndarray:
        dist = dist.reshape((2,) * self.N)
        for i, j in layer_pairs(self.N, parity):
            d = np.moveaxis(dist, (i, j), (0, 1)).reshape(4, -1)
            d = self.K.T @ d
            dist = np.moveaxis(d.reshape((2, 2) + (2,) * (self.N - 2)), (0, 1), (i, j))
        return dist.reshape(-1)

    def matrix(self, parity: str) -> np.ndarray:
        """Dense 2^N x 2^N one-layer matrix (small N only)."""
        if self.N > 10:
            raise ValueError("dense kernel matrix limited to N <= 10")
        dim = 2 ** self.N
        M = np.zeros((dim, dim))
        for s in range(dim):
            e = np.zeros(dim)
            e[s] = 1.0
            M[s] = self.step(e, parity)
        return M


def _config_index(occ: np.ndarray) -> int:
    # site 0 = most significant axis of the (2,)*N distribution tensor
    idx = 0
    for b in occ.astype(int):
        idx = idx * 2 + int(b)
    return idx


def exact_density(N: int, q, p: float, init: InitialCondition,
                  t_max: int) -> dict[str, np.ndarray]:
    """Exact rho(t) (occupation density) and P(t) for the particle process."""
    from .dp import branching_probs

    params = branching_probs(q, p)
    kern = MarkovKernel(N, params)
    dist = np.zeros(2 ** N)
    dist[_config_index(initial_state(init, N).occ)] = 1.0
    counts = np.array([bin(s).count("1") for s in range(2 ** N)])
    # config index s: site 0 is the most significant bit
    rho = np.zeros(t_max + 1)
    surv = np.zeros(t_max + 1)
    rho[0] = dist @ counts / N
    surv[0] = 1.0 - dist[0]
    for t in range(1, t_max + 1):
        dist = kern.step(dist, layer_parity(t))
        rho[t] = dist @ counts / N
        surv[t] = 1.0 - dist[0]
    return {"rho": rho, "surv": surv}


# ----------------------------------------------------------------------
# Dense two-qubit Clifford representatives
# ----------------------------------------------------------------------

_PAULI_DENSE = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def pauli_dense(s: PauliString) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for site in range(s.n):
        letter = s.content_at(site)
        m = np.kron(m, _PAULI_DENSE[(letter.x_bit, letter.z_bit)])
    return m


def _code_dense(code: int) -> np.ndarray:
    a = _PAULI_DENSE[(code & 1, code >> 1 & 1)]
    b = _PAULI_DENSE[(code >> 2 & 1, code >> 3 & 1)]
    return np.kron(a, b)


def _identify_code(M: np.ndarray) -> int | None:
    for c in range(16):
        P = _code_dense(c)
        for phase in (1, -1, 1j, -1j):
            if np.allclose(M, phase * P, atol=1e-9):
                return c
    return None


def _action_key(U: np.ndarray) -> tuple[int, ...] | None:
    key = []
    for gen_code in (0b0001, 0b0010, 0b0100, 0b1000):
        img = _identify_code(U @ _code_dense(gen_code) @ U.conj().T)
        if img is None:
            return None
        key.append(img)
    return tuple(key)


_UNITARY_REPS: dict[tuple[int, ...], np.ndarray] | None = None


def clifford_unitary_reps() -> dict[tuple[int, ...], np.ndarray]:
    """One 4x4 unitary per symplectic action, by closure over {H, S, CZ}."""
    global _UNITARY_REPS
    if _UNITARY_REPS is not None:
        return _UNITARY_REPS
    H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    S = np.diag([1, 1j]).astype(complex)
    I2 = np.eye(2, dtype=complex)
    CZ = np.diag([1, 1, 1, -1]).astype(complex)
    gens = [np.kron(H, I2), np.kron(I2, H), np.kron(S, I2), np.kron(I2, S), CZ]
    reps: dict[tuple[int, ...], np.ndarray] = {}
    frontier = [np.eye(4, dtype=complex)]
    reps[_action_key(frontier[0])] = frontier[0]
    while frontier:
        nxt = []
        for U in frontier:
            for g in gens:
                V = g @ U
                key = _action_key(V)
                if key not in reps:
                    reps[key] = V
                    nxt.append(V)
        frontier = nxt
    assert len(reps) == 720
    _UNITARY_REPS = reps
    return reps


def unitary_for_gate(gate: TwoQubitClifford) -> np.ndarray:
    key = (gate.image_x1, gate.image_z1, gate.image_x2, gate.image_z2)
    return clifford_unitary_reps()[key]


def embed_two_qubit(U4: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """Lift a two-qubit unitary acting on qubits (i, j) to n qubits."""
    dim = 2 ** n
    U = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bi = (col >> (n - 1 - i)) & 1
        bj = (col >> (n - 1 - j)) & 1
        sub_in = 2 * bi + bj
        base = col & ~(1 << (n - 1 - i)) & ~(1 << (n - 1 - j))
        for sub_out in range(4):
            amp = U4[sub_out, sub_in]
            if amp == 0:
                continue
            row = base | ((sub_out >> 1) << (n - 1 - i)) | ((sub_out & 1) << (n - 1 - j))
            U[row, col] += amp
    return U


def dense_conjugate(gate: TwoQubitClifford, s: PauliString,
                    sites: tuple[int, int]) -> PauliString:
    """U P U^dag through explicit matrices, re-identified as a Pauli string."""
    if s.n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense oracle limited to n <= {MAX_DENSE_QUBITS}")
    U = embed_two_qubit(unitary_for_gate(gate), sites[0], sites[1], s.n)
    M = U @ pauli_dense(s) @ U.conj().T
    for x_mask in range(2 ** s.n):
        for z_mask in range(2 ** s.n):
            cand = PauliString.from_bits(
                [(x_mask >> (s.n - 1 - q)) & 1 for q in range(s.n)],
                [(z_mask >> (s.n - 1 - q)) & 1 for q in range(s.n)])
            P = pauli_dense(cand)
            for phase in (1, -1, 1j, -1j):
                if np.allclose(M, phase * P, atol=1e-9):
                    return cand
    raise RuntimeError("conjugated operator is not a Pauli string (broken gate)")


# ----------------------------------------------------------------------
# Full-environment-tracking tableau
# ----------------------------------------------------------------------

class FullTableau:
    """Generator list over an explicitly growing register A + S + E.

    The width grows by one qubit per swap event; no partial-tracking
    shortcuts are taken anywhere.  Mirrors GeneratorSet's initial conditions.
    """

    def __init__(self, case: InitCase, N: int, k: int):
        if N > MAX_TABLEAU_N:
            raise ValueError(f"full tableau limited to N <= {MAX_TABLEAU_N}")
        if not 1 <= k <= N:
            raise ValueError("need 1 <= k <= N")
        self.case, self.N, self.k = case, N, k
        self.n_env = 0
        rows = 2 * k if case is InitCase.MIXED_S2_MIXED_E else N + k
        self.x = np.zeros((rows, k + N), dtype=bool)
        self.z = np.zeros((rows, k + N), dtype=bool)
        for j in range(k):
            self.x[2 * j, j] = self.x[2 * j, k + j] = True
            self.z[2 * j + 1, j] = self.z[2 * j + 1, k + j] = True
        if case is not InitCase.MIXED_S2_MIXED_E:
            for j in range(N - k):
                self.z[2 * k + j, 2 * k + j] = True

    @property
    def width(self) -> int:
        return self.k + self.N + self.n_env

    @property
    def d_total(self) -> int:
        return self.x.shape[0]

    def apply_gate(self, sites: tuple[int, int], gate_index: int) -> None:
        from .clifford import ACTION

        i, j = self.k + sites[0], self.k + sites[1]
        code = (self.x[:, i].astype(np.uint8)
                | self.z[:, i].astype(np.uint8) << 1
                | self.x[:, j].astype(np.uint8) << 2
                | self.z[:, j].astype(np.uint8) << 3)
        out = ACTION[gate_index, code]
        self.x[:, i] = out & 1
        self.z[:, i] = out >> 1 & 1
        self.x[:, j] = out >> 2 & 1
        self.z[:, j] = out >> 3 & 1

    def apply_swap(self, site: int) -> None:
        """Literal swap with a fresh ancilla appended as a new column."""
        col = self.k + site
        d = self.d_total
        self.x = np.concatenate([self.x, np.zeros((d, 1), dtype=bool)], axis=1)
        self.z = np.concatenate([self.z, np.zeros((d, 1), dtype=bool)], axis=1)
        if self.case is InitCase.PURE_ALL:
            # the incoming ancilla is |0>: its Z generator joins the group
            new_x = np.zeros((1, self.x.shape[1]), dtype=bool)
            new_z = np.zeros((1, self.x.shape[1]), dtype=bool)
            new_z[0, -1] = True
            self.x = np.concatenate([self.x, new_x])
            self.z = np.concatenate([self.z, new_z])
        for arr in (self.x, self.z):
            arr[:, [col, -1]] = arr[:, [-1, col]]
        self.n_env += 1

    def _rank(self, cols) -> int:
        xs = gf2.pack_bits(self.x)
        zs = gf2.pack_bits(self.z)
        return gf2.rank_on_sites(xs, zs, cols)

    def region_cols(self, region: str) -> list[int]:
        k, N, W = self.k, self.N, self.width
        blocks = {"A": range(k), "S": range(k, k + N), "E": range(k + N, W)}
        return [c for part in region for c in blocks[part]]

    def region_size(self, region: str) -> int:
        return len(self.region_cols(region))

    def entropy(self, region: str) -> int:
        """H_R = N_R - d + rank of the rows on the complement columns."""
        cols_r = set(self.region_cols(region))
        comp = [c for c in range(self.width) if c not in cols_r]
        return self.region_size(region) - self.d_total + self._rank(comp)

    def entropy_by_counting(self, region: str) -> int:
        """H_R = N_R - |G_R| with the subgroup order counted by enumeration."""
        d = self.d_total
        if d > 20:
            raise ValueError("enumeration oracle limited to d <= 20")
        cols_r = set(self.region_cols(region))
        comp = np.array([c for c in range(self.width) if c not in cols_r], dtype=int)
        masks = np.arange(2 ** d, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(d)) & 1  # (2^d, d)
        outside_x = (bits.astype(np.uint8) @ self.x[:, comp].astype(np.uint8)) % 2
        outside_z = (bits.astype(np.uint8) @ self.z[:, comp].astype(np.uint8)) % 2
        inside = ~(outside_x.any(axis=1) | outside_z.any(axis=1))
        n_members = int(inside.sum())
        g_r = int(np.log2(n_members))
        if 2 ** g_r != n_members:
            raise RuntimeError("subgroup order is not a power of two")
        return self.region_size(region) - g_r


def run_script(obj, script) -> None:
    """Drive any tableau-like object through a (gates, swaps) layer script.

    Script: list of layers; each layer is (parity, gate_indices, swap_sites)
    with one gate index per brick-wall pair.
    """
    for parity, gate_indices, swap_sites in script:
        for pair, g in zip(layer_pairs(obj.N, parity), gate_indices):
            obj.apply_gate(pair, int(g))
        for site in swap_sites:
            obj.apply_swap(int(site))


def random_script(N: int, depth: int, p: float, rng: np.random.Generator):
    """A reproducible gate/swap script shared between implementations."""
    from .clifford import sample_gate_indices

    script = []
    for t in range(1, depth + 1):
        parity = layer_parity(t)
        gates = sample_gate_indices(rng, N // 2)
        swaps = np.nonzero(rng.random(N) < p)[0].tolist()
        script.append((parity, [int(g) for g in np.atleast_1d(gates)], swaps))
    return script
