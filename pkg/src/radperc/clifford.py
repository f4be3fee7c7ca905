"""Random two-qubit Clifford gates, brick-wall layers and stochastic swap-out.

Gates are represented by their conjugation action on phaseless two-site Pauli
content.  Content on a pair of sites (i, j) is a 4-bit code

    bit 0 = x_i,  bit 1 = z_i,  bit 2 = x_j,  bit 3 = z_j,

and a gate is the images of the four generators (X_i, Z_i, X_j, Z_j), i.e. an
element of the binary symplectic group Sp(4, 2).  Sp(4, 2) has 720 elements;
sampling it uniformly is equivalent to sampling the 11520-element two-qubit
Clifford group modulo phase, because Pauli factors only flip signs, which are
untracked here.

The canonical gate table enumerates all 720 elements constructively: the image
of X_i runs over the 15 nontrivial codes, the image of Z_i over its 8
anticommuting partners, and the images of (X_j, Z_j) over the 6 completions in
the symplectic complement.  Uniform sampling draws one index per stage, which
is rejection-free and uniform by transitivity of the symplectic action.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliLetter, PauliString

N_GATES = 720
N_CODES = 16


def code_commutes(a: int, b: int) -> bool:
    """Symplectic form of two 4-bit content codes (True = commuting)."""
    par = ((a & 1) & (b >> 1 & 1)) ^ ((a >> 1 & 1) & (b & 1)) \
        ^ ((a >> 2 & 1) & (b >> 3 & 1)) ^ ((a >> 3 & 1) & (b >> 2 & 1))
    return par == 0


def _enumerate_gates() -> np.ndarray:
    """All Sp(4,2) elements as generator-image rows, in canonical order."""
    gates = []
    for ix in range(1, N_CODES):
        partners_z1 = [c for c in range(1, N_CODES) if not code_commutes(c, ix)]
        assert len(partners_z1) == 8
        for iz in partners_z1:
            complement = [c for c in range(N_CODES)
                          if code_commutes(c, ix) and code_commutes(c, iz)]
            assert len(complement) == 4  # 2-dim symplectic complement incl. 0
            for jx in complement:
                if jx == 0:
                    continue
                for jz in complement:
                    if jz == 0 or code_commutes(jz, jx):
                        continue
                    gates.append((ix, iz, jx, jz))
    table = np.array(gates, dtype=np.uint8)
    assert table.shape == (N_GATES, 4)
    return table


def _build_action(gates: np.ndarray) -> np.ndarray:
    """ACTION[g, c] = image code of content c under gate g (XOR of images)."""
    action = np.zeros((N_GATES, N_CODES), dtype=np.uint8)
    for c in range(N_CODES):
        img = np.zeros(N_GATES, dtype=np.uint8)
        for bit in range(4):
            if c >> bit & 1:
                img ^= gates[:, bit]
        action[:, c] = img
    return action


GATE_IMAGES = _enumerate_gates()
ACTION = _build_action(GATE_IMAGES)

# Support profile of every nontrivial code: 0 = pair site i only,
# 1 = pair site j only, 2 = both sites.  Used by tests.
CODE_SUPPORT = np.array([(-1 if c == 0 else
                          (2 if (c & 3) and (c >> 2) else (0 if c & 3 else 1)))
                         for c in range(N_CODES)], dtype=np.int8)


def _code_to_string(code: int) -> PauliString:
    s = PauliString(2)
    s.set_content(0, PauliLetter((code & 1, code >> 1 & 1)))
    s.set_content(1, PauliLetter((code >> 2 & 1, code >> 3 & 1)))
    return s


def _string_to_code(s: PauliString) -> int:
    a, b = s.content_at(0), s.content_at(1)
    return a.x_bit | a.z_bit << 1 | b.x_bit << 2 | b.z_bit << 3


@dataclass(frozen=True)
class TwoQubitClifford:
    """A two-qubit Clifford gate modulo phase, given by its generator images."""

    image_x1: int
    image_z1: int
    image_x2: int
    image_z2: int

    def __post_init__(self):
        imgs = (self.image_x1, self.image_z1, self.image_x2, self.image_z2)
        for k, a in enumerate(imgs):
            for l, b in enumerate(imgs):
                want_anticommute = (k, l) in ((0, 1), (1, 0), (2, 3), (3, 2))
                if code_commutes(a, b) == want_anticommute and k != l:
                    raise ValueError("generator images break commutation relations")
        # independence over GF(2): all 16 span elements distinct
        span = {0}
        for a in imgs:
            span |= {v ^ a for v in span}
        if len(span) != 16:
            raise ValueError("generator images are GF(2)-dependent")

    @classmethod
    def from_index(cls, idx: int) -> "TwoQubitClifford":
        return cls(*(int(v) for v in GATE_IMAGES[idx]))

    @classmethod
    def identity(cls) -> "TwoQubitClifford":
        return cls(0b0001, 0b0010, 0b0100, 0b1000)

    @classmethod
    def swap(cls) -> "TwoQubitClifford":
        return cls(0b0100, 0b1000, 0b0001, 0b0010)

    @classmethod
    def cnot(cls) -> "TwoQubitClifford":
        # control = site 1, target = site 2
        return cls(0b0101, 0b0010, 0b0100, 0b1010)

    def image(self, generator: str) -> PauliString:
        """Image of 'X1' | 'Z1' | 'X2' | 'Z2' as a 2-site string."""
        key = {"X1": self.image_x1, "Z1": self.image_z1,
               "X2": self.image_x2, "Z2": self.image_z2}[generator]
        return _code_to_string(key)

    def apply_code(self, code: int) -> int:
        out = 0
        for bit, img in enumerate((self.image_x1, self.image_z1,
                                   self.image_x2, self.image_z2)):
            if code >> bit & 1:
                out ^= img
        return out

    @property
    def index(self) -> int:
        row = np.array([self.image_x1, self.image_z1, self.image_x2, self.image_z2],
                       dtype=np.uint8)
        hits = np.nonzero((GATE_IMAGES == row).all(axis=1))[0]
        return int(hits[0])


def sample_clifford(rng: np.random.Generator) -> TwoQubitClifford:
    """Uniform gate from the canonical table via the three-stage construction."""
    idx = sample_gate_indices(rng, None)
    return TwoQubitClifford.from_index(int(idx))


def sample_gate_indices(rng: np.random.Generator, size) -> np.ndarray | int:
    """Uniform canonical-table indices; one (15, 8, 6)-stage draw per gate."""
    a = rng.integers(0, 15, size=size)
    b = rng.integers(0, 8, size=size)
    c = rng.integers(0, 6, size=size)
    return (a * 8 + b) * 6 + c


@dataclass
class CircuitParams:
    """Brick-wall circuit shape: N periodic sites, swap rate p, depth layers."""

    N: int
    p: float
    depth: int
    seed: int = 0

    def __post_init__(self):
        if self.N % 2 != 0 or self.N <= 0:
            raise ValueError("N must be positive and even")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("swap rate p must lie in [0, 1]")


@dataclass(frozen=True)
class SwapEvent:
    site: int
    layer: int


def layer_pairs(N: int, parity: str) -> list[tuple[int, int]]:
    """Gate pairs of a brick-wall layer: even -> (2m, 2m+1), odd -> shifted by 1."""
    if parity == "even":
        return [(2 * m, 2 * m + 1) for m in range(N // 2)]
    if parity == "odd":
        return [((2 * m + 1) % N, (2 * m + 2) % N) for m in range(N // 2)]
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def layer_parity(t: int) -> str:
    """Parity of gate layer t (1-based); the first layer is even."""
    return "even" if (t - 1) % 2 == 0 else "odd"


def conjugate(s: PauliString, gate: TwoQubitClifford, sites: tuple[int, int]) -> PauliString:
    """Conjugate the string's content at a site pair: P -> U P U^dag, phaseless."""
    i, j = sites
    if i == j:
        raise ValueError("gate sites must be distinct")
    a, b = s.content_at(i), s.content_at(j)
    code = a.x_bit | a.z_bit << 1 | b.x_bit << 2 | b.z_bit << 3
    out = gate.apply_code(code)
    res = s.copy()
    res.set_content(i, PauliLetter((out & 1, out >> 1 & 1)))
    res.set_content(j, PauliLetter((out >> 2 & 1, out >> 3 & 1)))
    return res


def apply_layer(s: PauliString, parity: str, params: CircuitParams,
                rng: np.random.Generator) -> PauliString:
    """One brick-wall layer of independent random Cliffords."""
    if s.n != params.N:
        raise ValueError("string width does not match circuit size")
    out = s
    for pair in layer_pairs(params.N, parity):
        out = conjugate(out, sample_clifford(rng), pair)
    return out


def apply_swaps(s: PauliString, p: float, layer: int,
                rng: np.random.Generator) -> tuple[PauliString, list[SwapEvent]]:
    """Swap each site out with probability p: content zeroed, event recorded."""
    hit = np.nonzero(rng.random(s.n) < p)[0]
    out = s.copy()
    for site in hit:
        out.set_content(int(site), PauliLetter.I)
    return out, [SwapEvent(int(site), layer) for site in hit]


def evolve_otoc(params: CircuitParams, rng: np.random.Generator,
                x0: int = 0) -> np.ndarray:
    """Occupation history n_x(t) of the spreading string X_{x0}.

    One time unit is one gate layer followed by its swap round.  Returns a
    (depth+1, N) boolean array; once the string hits the identity it is
    absorbed and the remaining rows stay zero.
    """
    s = PauliString.single(params.N, x0, PauliLetter.X)
    occ = np.zeros((params.depth + 1, params.N), dtype=bool)
    occ[0] = s.occupation_bits()
    for t in range(1, params.depth + 1):
        s = apply_layer(s, layer_parity(t), params, rng)
        s, _ = apply_swaps(s, params.p, t, rng)
        if s.is_identity():
            break
        occ[t] = s.occupation_bits()
    return occ


def otoc_ensemble_batch(params: CircuitParams, n_traj: int,
                        rng: np.random.Generator, accum, x0: int = 0) -> None:
    """Evolve a batch of independent single-string trajectories, vectorized.

    Equivalent in distribution to `evolve_otoc` repeated n_traj times; dead
    trajectories are compacted away.  Occupations after each layer+swap round
    are pushed into the accumulator.
    """
    N, p, depth = params.N, params.p, params.depth
    x = np.zeros((n_traj, N), dtype=bool)
    z = np.zeros((n_traj, N), dtype=bool)
    x[:, x0] = True
    accum.begin(n_traj)
    accum.record(0, x | z)
    pair_cache = {par: np.array(layer_pairs(N, par)) for par in ("even", "odd")}
    for t in range(1, depth + 1):
        if x.shape[0] == 0:
            break
        pairs = pair_cache[layer_parity(t)]
        li, ri = pairs[:, 0], pairs[:, 1]
        g = sample_gate_indices(rng, (x.shape[0], N // 2))
        code = (x[:, li].astype(np.uint8) | z[:, li].astype(np.uint8) << 1
                | x[:, ri].astype(np.uint8) << 2 | z[:, ri].astype(np.uint8) << 3)
        out = ACTION[g, code]
        x[:, li] = out & 1
        z[:, li] = out >> 1 & 1
        x[:, ri] = out >> 2 & 1
        z[:, ri] = out >> 3 & 1
        if p > 0.0:
            keep = rng.random(x.shape) >= p
            x &= keep
            z &= keep
        occ = x | z
        alive = occ.any(axis=1)
        n_alive = int(alive.sum())
        if n_alive < x.shape[0]:
            x, z, occ = x[alive], z[alive], occ[alive]
        if n_alive:
            accum.record(t, occ)
