"""Stochastic particle process on the tilted square lattice for qudit dimension q.

Occupations live on the N periodic edges (sites); gate vertices sit between
adjacent pairs, alternating even/odd brick-wall parity.  A vertex with at
least one occupied input edge emits particles on its two output edges with the
four outcome probabilities below, which fold the per-edge swap-out rate p into
the gate statistics; a vertex with empty inputs emits nothing.  The q -> inf
limit is exactly bond-directed percolation with edges open with probability
1 - p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clifford import layer_pairs, layer_parity

INFINITY = math.inf

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class BranchingParams:
    """Vertex-outcome probabilities for local dimension q and swap rate p."""

    q: float
    p: float
    p_both: float
    p_left: float
    p_right: float
    p_none: float

    def __post_init__(self):
        total = self.p_both + self.p_left + self.p_right + self.p_none
        if abs(total - 1.0) > _PROB_TOL:
            raise ValueError(f"outcome probabilities sum to {total}, not 1")
        if self.p_left != self.p_right:
            raise ValueError("left/right symmetry violated")


def branching_probs(q, p: float) -> BranchingParams:
    """Outcome probabilities for an occupied vertex.

    For finite q:
        p_both  = [(q^2-1)/(q^2+1)] (1-p)^2
        p_left  = p_right = (1-p)/(q^2+1) + [(q^2-1)/(q^2+1)] p(1-p)
        p_none  = [(q^2-1)/(q^2+1)] p^2 + 2p/(q^2+1)
    For q = inf the edges decouple: (1-p)^2, p(1-p), p(1-p), p^2.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("swap rate p must lie in [0, 1]")
    if q == INFINITY:
        return BranchingParams(INFINITY, p, (1 - p) ** 2, p * (1 - p),
                               p * (1 - p), p * p)
    q = int(q)
    if q < 2:
        raise ValueError("q must be >= 2 or INFINITY")
    w = (q * q - 1) / (q * q + 1)          # weight of two-site images
    u = 1 / (q * q + 1)                    # weight of each one-site image
    p_both = w * (1 - p) ** 2
    p_side = u * (1 - p) + w * p * (1 - p)
    p_none = w * p * p + 2 * p * u
    return BranchingParams(q, p, p_both, p_side, p_side, p_none)


@dataclass
class LatticeState:
    """Edge occupations plus the layer clock (t, parity of the next layer)."""

    occ: np.ndarray
    t: int = 0
    parity: str = "even"

    def __post_init__(self):
        self.occ = np.asarray(self.occ, dtype=bool)
        if self.occ.ndim != 1 or self.occ.size % 2:
            raise ValueError("occupation vector must be 1-d with even length")

    @property
    def N(self) -> int:
        return self.occ.size

    def alive(self) -> bool:
        return bool(self.occ.any())


@dataclass(frozen=True)
class SingleSite:
    x0: int = 0


@dataclass(frozen=True)
class Block:
    k: int
    origin: int = 0


@dataclass(frozen=True)
class Custom:
    occ: tuple


InitialCondition = SingleSite | Block | Custom


def initial_state(init: InitialCondition, N: int) -> LatticeState:
    occ = np.zeros(N, dtype=bool)
    if isinstance(init, SingleSite):
        occ[init.x0 % N] = True
    elif isinstance(init, Block):
        if not 1 <= init.k <= N:
            raise ValueError("block size must lie in [1, N]")
        occ[(init.origin + np.arange(init.k)) % N] = True
    elif isinstance(init, Custom):
        bits = np.asarray(init.occ, dtype=bool)
        if bits.size != N:
            raise ValueError("custom occupation width mismatch")
        if not bits.any():
            raise ValueError("custom initial condition is empty")
        occ = bits
    else:
        raise TypeError(f"unknown initial condition {init!r}")
    return LatticeState(occ)


def init_origin(init: InitialCondition, N: int) -> int:
    """Reference site for displacement observables (R^2, front position)."""
    if isinstance(init, SingleSite):
        return init.x0 % N
    if isinstance(init, Block):
        return init.origin % N
    return 0


def _vertex_update(occ: np.ndarray, li: np.ndarray, ri: np.ndarray,
                   params: BranchingParams, u: np.ndarray) -> None:
    """Sample the vertex outcomes in place; u are uniforms, one per vertex.

    A single variate is compared against cumulative probabilities in the fixed
    order (both, left, right, none) for cross-platform reproducibility.
    """
    occupied = occ[..., li] | occ[..., ri]
    a = params.p_both
    b = a + params.p_left
    c = b + params.p_right
    occ[..., li] = occupied & (u < b)
    occ[..., ri] = occupied & ((u < a) | ((u >= b) & (u < c)))


def step(state: LatticeState, params: BranchingParams,
         rng: np.random.Generator) -> LatticeState:
    """Advance one layer: sample every current-parity vertex, flip parity."""
    occ = state.occ.copy()
    pairs = np.array(layer_pairs(state.N, state.parity))
    u = rng.random(state.N // 2)
    _vertex_update(occ, pairs[:, 0], pairs[:, 1], params, u)
    return LatticeState(occ, state.t + 1, "odd" if state.parity == "even" else "even")


def run_trajectory(init: InitialCondition, params: BranchingParams, N: int,
                   depth: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Single-trajectory per-layer summaries, exiting early on absorption.

    Returns arrays indexed by t = 0..depth: particle count, alive flag,
    sum of squared displacements from the initial site, and the rightmost
    occupied displacement (minimal-image convention; 0 where dead).
    """
    state = initial_state(init, N)
    origin = init_origin(init, N)
    disp = (np.arange(N) - origin + N // 2) % N - N // 2
    count = np.zeros(depth + 1, dtype=np.int64)
    alive = np.zeros(depth + 1, dtype=bool)
    sum_x2 = np.zeros(depth + 1, dtype=np.int64)
    rightmost = np.zeros(depth + 1, dtype=np.int64)

    def record(t, occ):
        count[t] = occ.sum()
        alive[t] = occ.any()
        if alive[t]:
            sum_x2[t] = (disp[occ] ** 2).sum()
            rightmost[t] = disp[occ].max()

    record(0, state.occ)
    for t in range(1, depth + 1):
        state = step(state, params, rng)
        if not state.alive():
            break
        record(t, state.occ)
    return {"count": count, "alive": alive, "sum_x2": sum_x2,
            "rightmost": rightmost}


def dp_ensemble_batch(params: BranchingParams, N: int, depth: int,
                      n_traj: int, rng: np.random.Generator, accum,
                      init: InitialCondition = SingleSite(0)) -> None:
    """Vectorized batch of independent trajectories feeding an accumulator."""
    state0 = initial_state(init, N)
    occ = np.broadcast_to(state0.occ, (n_traj, N)).copy()
    accum.begin(n_traj)
    accum.record(0, occ)
    pair_cache = {par: np.array(layer_pairs(N, par)) for par in ("even", "odd")}
    for t in range(1, depth + 1):
        if occ.shape[0] == 0:
            break
        pairs = pair_cache[layer_parity(t)]
        u = rng.random((occ.shape[0], N // 2))
        _vertex_update(occ, pairs[:, 0], pairs[:, 1], params, u)
        keep = occ.any(axis=1)
        n_alive = int(keep.sum())
        if n_alive < occ.shape[0]:
            occ = occ[keep]
        if n_alive:
            accum.record(t, occ)
