"""Stabilizer-group evolution with partial environment tracking.

The tracked register is A+S (k reference qubits, then N system qubits); the
environment E grows by one fresh ancilla per swap event and is never stored
explicitly.  Generators are kept as a basis G = G_AS + G_perp: the AS-labeled
rows span exactly the subgroup of stabilizers with trivial content outside
A+S, while perp-labeled rows additionally carry untracked environment content.

Because every swapped-in ancilla is fresh, a GF(2) combination of rows has
trivial environment content iff it only involves AS rows.  This gives closed
forms for all region entropies H_R = N_R - d + rank proj_{R^c}:

* complements inside the tracked register (R contains E) use the rank of all
  rows restricted to the tracked complement columns;
* complements containing E contribute #perp to the rank plus the rank of the
  AS rows on the remaining tracked columns.

Initial conditions (k Bell pairs between A and the first k system qubits):

* case "i"  : S2 and E maximally mixed    -- d = 2k rows, constant
* case "ii" : S2 pure |0..0>, E mixed     -- d = N + k rows, constant
* case "iii": S2 and E pure |0..0>        -- pure global state; only the AS
              subgroup is stored, swapped-out rows are deleted and each
              swapped-in ancilla contributes a fresh Z generator
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import gf2
from .clifford import ACTION, layer_pairs, sample_gate_indices


class InitCase(Enum):
    MIXED_S2_MIXED_E = "i"
    PURE_S2_MIXED_E = "ii"
    PURE_ALL = "iii"


REGIONS = ("A", "S", "AS", "E", "AE", "SE")


@dataclass
class InfoResult:
    """Entropies (bits), coherent informations and decoder quantities."""

    H_A: int
    H_S: int
    H_AS: int
    H_E: int
    H_AE: int
    I_c_E: int
    I_c_S: int
    F: float | None = None
    P_succ: float | None = None
    F_pure: float | None = None


class GeneratorSet:
    """Single-realization generator list over the tracked A+S register."""

    def __init__(self, case: InitCase, N: int, k: int):
        if not 1 <= k <= N:
            raise ValueError("need 1 <= k <= N")
        if N % 2:
            raise ValueError("N must be even")
        self.case = case
        self.N = N
        self.k = k
        self.width = k + N
        self.n_env = 0
        rows = 2 * k if case is InitCase.MIXED_S2_MIXED_E else N + k
        self.x = np.zeros((rows, self.width), dtype=bool)
        self.z = np.zeros((rows, self.width), dtype=bool)
        for j in range(k):
            self.x[2 * j, j] = self.x[2 * j, k + j] = True          # X_A,j X_j
            self.z[2 * j + 1, j] = self.z[2 * j + 1, k + j] = True  # Z_A,j Z_j
        if case is not InitCase.MIXED_S2_MIXED_E:
            for j in range(N - k):
                self.z[2 * k + j, 2 * k + j] = True                 # Z on S2
        self.as_label = np.ones(rows, dtype=bool)

    # -- basic structure -------------------------------------------------

    @property
    def d_total(self) -> int:
        return self.x.shape[0]

    @property
    def n_as(self) -> int:
        return int(self.as_label.sum())

    @property
    def n_perp(self) -> int:
        return self.d_total - self.n_as

    def a_cols(self) -> range:
        return range(self.k)

    def s_cols(self) -> range:
        return range(self.k, self.width)

    def _rank(self, row_mask, cols) -> int:
        xs = gf2.pack_bits(self.x[row_mask])
        zs = gf2.pack_bits(self.z[row_mask])
        return gf2.rank_on_sites(xs, zs, cols)

    # -- circuit actions --------------------------------------------------

    def apply_gate(self, sites: tuple[int, int], gate_index: int) -> None:
        """Conjugate every row's content at system sites (i, j)."""
        i, j = (self.k + sites[0], self.k + sites[1])
        code = (self.x[:, i].astype(np.uint8)
                | self.z[:, i].astype(np.uint8) << 1
                | self.x[:, j].astype(np.uint8) << 2
                | self.z[:, j].astype(np.uint8) << 3)
        out = ACTION[gate_index, code]
        self.x[:, i] = out & 1
        self.z[:, i] = out >> 1 & 1
        self.x[:, j] = out >> 2 & 1
        self.z[:, j] = out >> 3 & 1

    def apply_gate_layer(self, parity: str, rng: np.random.Generator) -> None:
        for pair in layer_pairs(self.N, parity):
            self.apply_gate(pair, int(sample_gate_indices(rng, None)))

    def apply_swap(self, site: int) -> None:
        """Swap the system qubit at `site` with a fresh environment ancilla.

        Gaussian elimination within the AS rows concentrates the content at
        the site into at most one row with an X component and one with a Z
        component; those rows leave the AS subgroup (relabeled perp, or
        deleted for the pure case where the swapped-out qubit is traced).
        The site column is then zeroed everywhere, and for the pure case the
        incoming |0> ancilla contributes a fresh Z generator.
        """
        if not 0 <= site < self.N:
            raise IndexError("swap site out of range")
        col = self.k + site
        as_idx = np.nonzero(self.as_label)[0]

        def eliminate(bit_arr, exclude):
            hits = [r for r in as_idx if bit_arr[r, col] and r not in exclude]
            if not hits:
                return None
            piv = hits[0]
            for r in hits[1:]:
                self.x[r] ^= self.x[piv]
                self.z[r] ^= self.z[piv]
            return piv

        px = eliminate(self.x, exclude=())
        pz = eliminate(self.z, exclude=(px,) if px is not None else ())
        if px is not None and pz is not None and self.z[px, col]:
            # keep the X pivot's content at the site pure X
            self.x[px] ^= self.x[pz]
            self.z[px] ^= self.z[pz]

        pivots = [r for r in (px, pz) if r is not None]
        if self.case is InitCase.PURE_ALL:
            keep = np.ones(self.d_total, dtype=bool)
            keep[pivots] = False
            self.x = self.x[keep]
            self.z = self.z[keep]
            self.as_label = self.as_label[keep]
        else:
            self.as_label[pivots] = False
        self.x[:, col] = False
        self.z[:, col] = False
        if self.case is InitCase.PURE_ALL:
            new_x = np.zeros((1, self.width), dtype=bool)
            new_z = np.zeros((1, self.width), dtype=bool)
            new_z[0, col] = True
            self.x = np.concatenate([self.x, new_x])
            self.z = np.concatenate([self.z, new_z])
            self.as_label = np.concatenate([self.as_label, [True]])
        self.n_env += 1

    def apply_swap_round(self, p: float, rng: np.random.Generator) -> list[int]:
        sites = np.nonzero(rng.random(self.N) < p)[0]
        for s in sites:
            self.apply_swap(int(s))
        return [int(s) for s in sites]

    # -- observables -------------------------------------------------------

    def entropy(self, region: str) -> int:
        """Von Neumann entropy of a region in bits (exact integer)."""
        if region not in REGIONS:
            raise ValueError(f"unknown region {region!r}")
        k, N, d = self.k, self.N, self.d_total
        all_rows = np.ones(d, dtype=bool)
        if self.case is InitCase.PURE_ALL:
            # globally pure: H_E = H_AS, H_AE = H_S, H_SE = H_A
            if region == "A" or region == "SE":
                return k - d + self._rank(all_rows, self.s_cols())
            if region == "S" or region == "AE":
                return N - d + self._rank(all_rows, self.a_cols())
            return (k + N) - d  # AS and E
        as_rows = self.as_label
        perp = self.n_perp
        if region == "A":
            return k - d + perp + self._rank(as_rows, self.s_cols())
        if region == "S":
            return N - d + perp + self._rank(as_rows, self.a_cols())
        if region == "AS":
            return (k + N) - self.n_as
        if region == "E":
            return self.n_env - d + self._rank(all_rows, range(self.width))
        if region == "AE":
            return (k + self.n_env) - d + self._rank(all_rows, self.s_cols())
        return (N + self.n_env) - d + self._rank(all_rows, self.a_cols())

    def decode_log2_fidelity(self) -> int:
        """log2 of the decoding fidelity, -rank of the rows on the S columns.

        Valid when every tracked generator originates from the reference Bell
        pairs (case "i", where the group is exactly S_Bell).
        """
        if self.case is not InitCase.MIXED_S2_MIXED_E:
            raise ValueError("decoder fidelity requires the all-mixed case (i)")
        return -self._rank(np.ones(self.d_total, dtype=bool), self.s_cols())

    def decode_fidelity(self) -> float:
        return 2.0 ** self.decode_log2_fidelity()

    def coherent_info(self) -> InfoResult:
        H = {r: self.entropy(r) for r in ("A", "S", "AS", "E", "AE")}
        res = InfoResult(
            H_A=H["A"], H_S=H["S"], H_AS=H["AS"], H_E=H["E"], H_AE=H["AE"],
            I_c_E=H["E"] - H["AE"], I_c_S=H["S"] - H["AS"],
        )
        if self.case is InitCase.MIXED_S2_MIXED_E:
            res.F = self.decode_fidelity()
        elif self.case is InitCase.PURE_ALL:
            res.P_succ = 2.0 ** (self.k - self.N - H["E"])
            res.F_pure = 2.0 ** (res.I_c_E - self.k)
            res.F = res.F_pure
        return res

    def purity_identities(self) -> tuple[float, float | None, float | None]:
        """(purity of AE, postselection success probability, pure-decoder fidelity).

        Case "i": returns (2^-H_AE, None, None) after verifying the exact
        identity 2^(N_E - k) * purity_AE = F at the integer-exponent level.
        Case "iii": returns (2^-H_AE, 2^(k-N) * 2^-H_E, 2^(I_c_E - k)).
        """
        if self.case is InitCase.PURE_S2_MIXED_E:
            raise ValueError("purity identities hold for cases i and iii only")
        H_AE = self.entropy("AE")
        purity_AE = 2.0 ** (-H_AE)
        if self.case is InitCase.MIXED_S2_MIXED_E:
            log2_lhs = (self.n_env - self.k) - H_AE
            if log2_lhs != self.decode_log2_fidelity():
                raise RuntimeError("purity-fidelity identity violated (internal error)")
            return purity_AE, None, None
        H_E = self.entropy("E")
        ic_e = H_E - self.entropy("AE")
        return purity_AE, 2.0 ** (self.k - self.N - H_E), 2.0 ** (ic_e - self.k)

    def check_invariants(self) -> None:
        """Row independence and pairwise commutation of the tracked content.

        Perp rows carry additional untracked environment content, so only AS
        rows are required to commute pairwise on the tracked register; row
        independence of AS rows holds over the tracked columns alone.
        """
        as_rows = self.as_label
        xs = gf2.pack_bits(self.x[as_rows])
        zs = gf2.pack_bits(self.z[as_rows])
        n_as = int(as_rows.sum())
        if gf2.rank_on_sites(xs, zs, range(self.width)) != n_as:
            raise AssertionError("AS rows are GF(2)-dependent on tracked columns")
        comm = (self.x[as_rows].astype(np.uint8) @ self.z[as_rows].T.astype(np.uint8)
                + self.z[as_rows].astype(np.uint8) @ self.x[as_rows].T.astype(np.uint8)) % 2
        if comm.any():
            raise AssertionError("AS rows do not commute pairwise")


class StabilizerEnsemble:
    """Vectorized batch of independent GeneratorSet realizations.

    Rows are stored word-packed with a fixed capacity and an active mask so
    that the pure case (iii), where the generator count fluctuates, stays
    rectangular.  Semantics match GeneratorSet exactly; a scripted-equality
    test pins the two implementations together.
    """

    def __init__(self, case: InitCase, N: int, k: int, n_real: int):
        proto = GeneratorSet(case, N, k)
        self.case, self.N, self.k = case, N, k
        self.width = k + N
        self.B = n_real
        self.cap = self.width if case is InitCase.PURE_ALL else proto.d_total
        self.nw = gf2.n_words(self.width)
        self.x = np.zeros((n_real, self.cap, self.nw), dtype=np.uint64)
        self.z = np.zeros((n_real, self.cap, self.nw), dtype=np.uint64)
        self.active = np.zeros((n_real, self.cap), dtype=bool)
        self.as_label = np.zeros((n_real, self.cap), dtype=bool)
        d0 = proto.d_total
        self.x[:, :d0] = gf2.pack_bits(proto.x)[None, :, :]
        self.z[:, :d0] = gf2.pack_bits(proto.z)[None, :, :]
        self.active[:, :d0] = True
        self.as_label[:, :d0] = True
        self.n_env = np.zeros(n_real, dtype=np.int64)
        self._rows = np.arange(self.cap)

    def _col_bit(self, arr: np.ndarray, col: int) -> np.ndarray:
        w, b = divmod(col, gf2.WORD)
        return (arr[:, :, w] >> np.uint64(b)) & np.uint64(1)

    def apply_gate_layer(self, parity: str,
                         rng: np.random.Generator | None = None,
                         gate_indices: np.ndarray | None = None) -> None:
        """One brick-wall layer; gates per (realization, pair) drawn or scripted."""
        pairs = layer_pairs(self.N, parity)
        if gate_indices is None:
            gate_indices = sample_gate_indices(rng, (self.B, len(pairs)))
        for m, (i, j) in enumerate(pairs):
            ci, cj = self.k + i, self.k + j
            wi, bi = divmod(ci, gf2.WORD)
            wj, bj = divmod(cj, gf2.WORD)
            code = (self._col_bit(self.x, ci)
                    | self._col_bit(self.z, ci) << np.uint64(1)
                    | self._col_bit(self.x, cj) << np.uint64(2)
                    | self._col_bit(self.z, cj) << np.uint64(3)).astype(np.uint8)
            out = ACTION[gate_indices[:, m][:, None], code]
            for arr, w, b, bit in ((self.x, wi, bi, 0), (self.z, wi, bi, 1),
                                   (self.x, wj, bj, 2), (self.z, wj, bj, 3)):
                msk = np.uint64(1) << np.uint64(b)
                val = ((out >> bit) & 1).astype(np.uint64) << np.uint64(b)
                arr[:, :, w] = (arr[:, :, w] & ~msk) | val

    def apply_swap_round(self, p: float,
                         rng: np.random.Generator | None = None,
                         swap_mask: np.ndarray | None = None) -> None:
        """Per-site swap events across the batch (sites processed in order)."""
        if swap_mask is None:
            swap_mask = rng.random((self.B, self.N)) < p
        for site in range(self.N):
            hit = swap_mask[:, site]
            if hit.any():
                self._swap_site(site, hit)
        self.n_env += swap_mask.sum(axis=1)

    def _eliminate(self, arr: np.ndarray, col: int, hit: np.ndarray,
                   excl_mask: np.ndarray | None = None,
                   excl_idx: np.ndarray | None = None):
        """Concentrate one symplectic coordinate at `col` into a single AS row.

        Returns (has_pivot, pivot_index) per realization.  Where excl_mask is
        set, the row excl_idx is kept out of the elimination entirely.
        """
        bi = np.arange(self.B)
        cand = self._col_bit(arr, col).astype(bool) & self.as_label \
            & self.active & hit[:, None]
        if excl_mask is not None:
            sub = np.nonzero(excl_mask)[0]
            cand[sub, excl_idx[sub]] = False
        has = cand.any(axis=1)
        piv = np.argmax(cand, axis=1)
        elim = cand
        elim[bi, piv] = False
        if elim.any():
            px = self.x[bi, piv][:, None, :]
            pz = self.z[bi, piv][:, None, :]
            m = elim[:, :, None].astype(np.uint64)
            self.x ^= m * px
            self.z ^= m * pz
        return has, piv

    def _swap_site(self, site: int, hit: np.ndarray) -> None:
        col = self.k + site
        bi = np.arange(self.B)
        has_x, piv_x = self._eliminate(self.x, col, hit)
        has_z, piv_z = self._eliminate(self.z, col, hit,
                                       excl_mask=has_x, excl_idx=piv_x)
        # keep the X pivot's content at the site pure X where both pivots exist
        both = has_x & has_z & hit
        if both.any():
            xz_bit = self._col_bit(self.z, col)[bi, piv_x].astype(bool) & both
            if xz_bit.any():
                rows = np.nonzero(xz_bit)[0]
                self.x[rows, piv_x[rows]] ^= self.x[rows, piv_z[rows]]
                self.z[rows, piv_x[rows]] ^= self.z[rows, piv_z[rows]]
        # pivots leave the AS subgroup
        drop = np.zeros((self.B, self.cap), dtype=bool)
        drop[bi, piv_x] |= has_x & hit
        drop[bi, piv_z] |= has_z & hit
        if self.case is InitCase.PURE_ALL:
            self.active &= ~drop
            self.as_label &= ~drop
            self.x[drop] = 0
            self.z[drop] = 0
        else:
            self.as_label &= ~drop
        # zero the site column everywhere (for swapped realizations)
        w, b = divmod(col, gf2.WORD)
        msk = np.uint64(1) << np.uint64(b)
        clear = np.where(hit, ~msk, ~np.uint64(0))
        self.x[:, :, w] &= clear[:, None]
        self.z[:, :, w] &= clear[:, None]
        if self.case is InitCase.PURE_ALL:
            # fresh |0> ancilla: append a Z generator at the site
            rows = np.nonzero(hit)[0]
            if not (~self.active[rows]).any(axis=1).all():
                raise AssertionError("no free generator slot (capacity bug)")
            slot = np.argmax(~self.active, axis=1)[rows]
            self.active[rows, slot] = True
            self.as_label[rows, slot] = True
            self.x[rows, slot] = 0
            self.z[rows, slot] = 0
            self.z[rows, slot, w] = msk

    # -- batched observables --------------------------------------------

    def d_total(self) -> np.ndarray:
        return self.active.sum(axis=1)

    def n_as(self) -> np.ndarray:
        return (self.as_label & self.active).sum(axis=1)

    def _ranks(self, rows_mask: np.ndarray, cols) -> np.ndarray:
        return gf2.rank_on_sites_batched(self.x, self.z, list(cols),
                                         row_mask=rows_mask)

    def entropies(self, region: str) -> np.ndarray:
        """Batched region entropy; same closed forms as GeneratorSet.entropy."""
        if region not in REGIONS:
            raise ValueError(f"unknown region {region!r}")
        k, N = self.k, self.N
        d = self.d_total()
        a_cols = range(k)
        s_cols = range(k, self.width)
        if self.case is InitCase.PURE_ALL:
            if region in ("A", "SE"):
                return k - d + self._ranks(self.active, s_cols)
            if region in ("S", "AE"):
                return N - d + self._ranks(self.active, a_cols)
            return (k + N) - d
        n_as = self.n_as()
        perp = d - n_as
        as_rows = self.as_label & self.active
        if region == "A":
            return k - d + perp + self._ranks(as_rows, s_cols)
        if region == "S":
            return N - d + perp + self._ranks(as_rows, a_cols)
        if region == "AS":
            return (k + N) - n_as
        if region == "E":
            return self.n_env - d + self._ranks(self.active, range(self.width))
        if region == "AE":
            return (k + self.n_env) - d + self._ranks(self.active, s_cols)
        return (N + self.n_env) - d + self._ranks(self.active, a_cols)

    def decode_log2_fidelity(self) -> np.ndarray:
        if self.case is not InitCase.MIXED_S2_MIXED_E:
            raise ValueError("decoder fidelity requires the all-mixed case (i)")
        if self.cap == 2:
            return -self._rank2(range(self.k, self.width))
        return -self._ranks(self.active, range(self.k, self.width))

    def _rank2(self, cols) -> np.ndarray:
        """Closed-form rank for the k=1 two-row case, restricted to cols."""
        mask = gf2.bit_mask(cols, self.width)
        x = self.x & mask
        z = self.z & mask
        nz = x.any(axis=2) | z.any(axis=2)
        eq = (((x[:, 0] ^ x[:, 1]) == 0).all(axis=1)
              & ((z[:, 0] ^ z[:, 1]) == 0).all(axis=1))
        r = nz[:, 0].astype(np.int64) + nz[:, 1].astype(np.int64)
        both = nz[:, 0] & nz[:, 1] & eq
        return r - both.astype(np.int64)

    def coherent_info_E(self) -> np.ndarray:
        """I_c(A > E) = H_E - H_AE per realization."""
        return self.entropies("E") - self.entropies("AE")

    def coherent_info_S(self) -> np.ndarray:
        return self.entropies("S") - self.entropies("AS")


def info_trajectories(case: InitCase, N: int, k: int, p: float, depth: int,
                      n_real: int, rng: np.random.Generator,
                      record_times, want_info: bool = True,
                      want_fidelity: bool = True) -> dict[str, np.ndarray]:
    """Evolve a batch and sample information quantities at the given times.

    Returns per-realization arrays of shape (n_real, len(record_times)):
    "Ic_E", "Ic_S" (when want_info) and "log2_F" (when want_fidelity; the
    decoder fidelity for case i, the pure-decoder fidelity for case iii).
    """
    from .clifford import layer_parity

    times = sorted(set(int(t) for t in record_times))
    if any(t < 0 or t > depth for t in times):
        raise ValueError("record times outside [0, depth]")
    ens = StabilizerEnsemble(case, N, k, n_real)
    T = len(times)
    out: dict[str, np.ndarray] = {"t": np.array(times)}
    if want_info:
        out["Ic_E"] = np.zeros((n_real, T), dtype=np.int64)
        out["Ic_S"] = np.zeros((n_real, T), dtype=np.int64)
    if want_fidelity:
        out["log2_F"] = np.zeros((n_real, T), dtype=np.int64)

    def record(slot):
        if want_info:
            H_E = ens.entropies("E")
            H_AE = ens.entropies("AE")
            out["Ic_E"][:, slot] = H_E - H_AE
            out["Ic_S"][:, slot] = ens.entropies("S") - ens.entropies("AS")
        if want_fidelity:
            if case is InitCase.MIXED_S2_MIXED_E:
                out["log2_F"][:, slot] = ens.decode_log2_fidelity()
            elif case is InitCase.PURE_ALL:
                ic_e = out["Ic_E"][:, slot] if want_info \
                    else ens.coherent_info_E()
                out["log2_F"][:, slot] = ic_e - k
            else:
                raise ValueError("no fidelity notion for case ii")

    slot = 0
    if times and times[0] == 0:
        record(0)
        slot = 1
    for t in range(1, depth + 1):
        ens.apply_gate_layer(layer_parity(t), rng)
        ens.apply_swap_round(p, rng)
        if slot < T and times[slot] == t:
            record(slot)
            slot += 1
    return out


def geometric_record_times(depth: int, n_points: int = 24) -> list[int]:
    """Dense-early, geometric-late sampling grid including 0 and depth."""
    ts = {0, depth}
    ts.update(range(1, min(8, depth) + 1))
    g = np.unique(np.round(np.geomspace(1, depth, n_points)).astype(int))
    ts.update(int(t) for t in g)
    return sorted(ts)
