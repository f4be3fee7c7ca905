"""Ensemble accumulation and observable estimators.

The accumulator stores pure sums (trajectory counts are exact integers), so
merging partial accumulators is associative and order-independent; all
floating-point estimates are formed once, in `finalize`.  The squared-sum
fields used for standard errors are kept as float64 because their magnitudes
can exceed the int64 range at large N; they are still plain sums, so merges
remain exact in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TRACE_RHO_XB2 = 1.0  # maximally mixed rho_0: tr[rho_0 (X^b)^2] = 1


def otoc_prefactor(q, trace_rho_Xb2: float = DEFAULT_TRACE_RHO_XB2) -> float:
    """Static prefactor relating the averaged OTOC to the occupation mean.

    (1 + tr[rho_0 (X^b)^2]) / (q^2 - 1); equals 2/3 for qubits with the
    default maximally mixed initial state.  In the bond-percolation limit
    q = inf the formula degenerates to zero, so that mode reports the raw
    occupation density instead (prefactor 1); exponents and collapses are
    invariant under the constant either way.
    """
    if trace_rho_Xb2 < 0:
        raise ValueError("tr[rho_0 (X^b)^2] must be nonnegative")
    if q == np.inf:
        return 1.0
    if q < 2:
        raise ValueError("q must be >= 2 or infinite")
    return (1.0 + trace_rho_Xb2) / (q * q - 1.0)


def otoc_from_occupation(mean_occ: np.ndarray, q,
                         trace_rho_Xb2: float = DEFAULT_TRACE_RHO_XB2) -> np.ndarray:
    """Averaged OTOC from the occupation mean: prefactor * n_bar."""
    return otoc_prefactor(q, trace_rho_Xb2) * np.asarray(mean_occ, dtype=float)


@dataclass
class EnsembleAccumulator:
    """Streaming sums over trajectories for one (N, depth, origin) geometry.

    `record(t, occ)` takes the boolean occupation rows of the trajectories
    still alive at time t; dead trajectories contribute zeros implicitly.
    """

    N: int
    depth: int
    origin: int = 0
    keep_matrix: bool = True
    n_traj: int = 0
    alive_count: np.ndarray = field(init=False)
    sum_count: np.ndarray = field(init=False)
    sum_count_sq: np.ndarray = field(init=False)
    sum_x2: np.ndarray = field(init=False)
    sum_x2_sq: np.ndarray = field(init=False)
    sum_x2count: np.ndarray = field(init=False)
    sum_front: np.ndarray = field(init=False)
    sum_front_sq: np.ndarray = field(init=False)
    sum_C: np.ndarray | None = field(init=False)

    def __post_init__(self):
        nt = self.depth + 1
        self.alive_count = np.zeros(nt, dtype=np.int64)
        self.sum_count = np.zeros(nt, dtype=np.int64)
        self.sum_count_sq = np.zeros(nt, dtype=np.float64)
        self.sum_x2 = np.zeros(nt, dtype=np.int64)
        self.sum_x2_sq = np.zeros(nt, dtype=np.float64)
        self.sum_x2count = np.zeros(nt, dtype=np.float64)
        self.sum_front = np.zeros(nt, dtype=np.int64)
        self.sum_front_sq = np.zeros(nt, dtype=np.float64)
        self.sum_C = np.zeros((nt, self.N), dtype=np.int64) if self.keep_matrix else None
        disp = (np.arange(self.N) - self.origin + self.N // 2) % self.N - self.N // 2
        self._disp = disp.astype(np.int64)
        self._disp2 = self._disp ** 2

    def begin(self, n_new: int) -> None:
        self.n_traj += n_new

    def record(self, t: int, occ: np.ndarray) -> None:
        occ = np.asarray(occ, dtype=bool)
        count = occ.sum(axis=1).astype(np.int64)
        x2 = occ @ self._disp2
        front = np.where(occ, self._disp, np.iinfo(np.int64).min).max(axis=1)
        self.alive_count[t] += occ.shape[0]
        self.sum_count[t] += count.sum()
        self.sum_count_sq[t] += float((count.astype(np.float64) ** 2).sum())
        self.sum_x2[t] += x2.sum()
        self.sum_x2_sq[t] += float((x2.astype(np.float64) ** 2).sum())
        self.sum_x2count[t] += float((x2.astype(np.float64) * count).sum())
        self.sum_front[t] += front.sum()
        self.sum_front_sq[t] += float((front.astype(np.float64) ** 2).sum())
        if self.sum_C is not None:
            self.sum_C[t] += occ.sum(axis=0)

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        """Pure elementwise addition; geometry must agree."""
        if (self.N, self.depth, self.origin) != (other.N, other.depth, other.origin):
            raise ValueError("cannot merge accumulators with different geometry")
        out = EnsembleAccumulator(self.N, self.depth, self.origin,
                                  keep_matrix=self.keep_matrix and other.keep_matrix)
        out.n_traj = self.n_traj + other.n_traj
        for name in ("alive_count", "sum_count", "sum_count_sq", "sum_x2",
                     "sum_x2_sq", "sum_x2count", "sum_front", "sum_front_sq"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        if out.sum_C is not None:
            out.sum_C = self.sum_C + other.sum_C
        return out


@dataclass
class Curves:
    """Finalized ensemble curves with standard errors."""

    t: np.ndarray
    rho: np.ndarray
    rho_sem: np.ndarray
    surv: np.ndarray
    surv_sem: np.ndarray
    r2: np.ndarray
    r2_sem: np.ndarray
    front: np.ndarray
    front_sem: np.ndarray
    r2_massnorm: np.ndarray
    r2_massnorm_sem: np.ndarray
    otoc: np.ndarray | None
    otoc_sem: np.ndarray | None
    N: int
    n_traj: int
    prefactor: float


def _mean_sem(total: np.ndarray, total_sq: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    mean = total / n
    if n > 1:
        var = (total_sq - n * mean ** 2) / (n - 1)
        sem = np.sqrt(np.maximum(var, 0.0) / n)
    else:
        sem = np.zeros_like(mean, dtype=float)
    return mean, sem


def finalize(acc: EnsembleAccumulator, q=2,
             trace_rho_Xb2: float = DEFAULT_TRACE_RHO_XB2) -> Curves:
    """Turn sums into curves: rho(t), P(t), R^2(t), front, and the OTOC matrix.

    rho(t) = (1/N) sum_x C(x,t) and R^2(t) = (1/N) sum_x x^2 C(x,t) carry the
    static OTOC prefactor; the survival probability and front position do not.
    R^2 follows the unnormalized definition; a mass-normalized variant
    (sum x^2 n / sum n) is attached for comparison.
    """
    if acc.n_traj < 1:
        raise ValueError("empty ensemble")
    n = acc.n_traj
    c = otoc_prefactor(q, trace_rho_Xb2)
    mean_count, sem_count = _mean_sem(acc.sum_count.astype(float), acc.sum_count_sq, n)
    mean_x2, sem_x2 = _mean_sem(acc.sum_x2.astype(float), acc.sum_x2_sq, n)

    surv = acc.alive_count / n
    surv_sem = np.sqrt(surv * (1 - surv) / n)

    # front statistics are conditioned on survival
    with np.errstate(invalid="ignore", divide="ignore"):
        front = np.where(acc.alive_count > 0, acc.sum_front / np.maximum(acc.alive_count, 1), np.nan)
        var_front = (acc.sum_front_sq - acc.alive_count * front ** 2) / np.maximum(acc.alive_count - 1, 1)
        front_sem = np.where(acc.alive_count > 1,
                             np.sqrt(np.maximum(var_front, 0.0) / np.maximum(acc.alive_count, 1)),
                             np.nan)

    # mass-normalized spreading via the delta method for the ratio estimator
    with np.errstate(invalid="ignore", divide="ignore"):
        r2_mn = np.where(acc.sum_count > 0, acc.sum_x2 / np.maximum(acc.sum_count, 1), np.nan)
        var_c = acc.sum_count_sq / n - mean_count ** 2
        var_x = acc.sum_x2_sq / n - mean_x2 ** 2
        cov = acc.sum_x2count / n - mean_x2 * mean_count
        ratio_var = (var_x - 2 * r2_mn * cov + r2_mn ** 2 * var_c) / np.maximum(mean_count, 1e-300) ** 2
        r2_mn_sem = np.where(acc.sum_count > 0, np.sqrt(np.maximum(ratio_var, 0.0) / n), np.nan)

    otoc = otoc_sem = None
    if acc.sum_C is not None:
        frac = acc.sum_C / n
        otoc = c * frac
        otoc_sem = c * np.sqrt(frac * (1 - frac) / n)

    return Curves(
        t=np.arange(acc.depth + 1),
        rho=c * mean_count / acc.N,
        rho_sem=c * sem_count / acc.N,
        surv=surv,
        surv_sem=surv_sem,
        r2=c * mean_x2 / acc.N,
        r2_sem=c * sem_x2 / acc.N,
        front=front,
        front_sem=front_sem,
        r2_massnorm=r2_mn,
        r2_massnorm_sem=r2_mn_sem,
        otoc=otoc,
        otoc_sem=otoc_sem,
        N=acc.N,
        n_traj=n,
        prefactor=c,
    )


def front_std(acc: EnsembleAccumulator) -> np.ndarray:
    """Across-trajectory standard deviation of the front position (alive only)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(acc.alive_count > 0, acc.sum_front / np.maximum(acc.alive_count, 1), np.nan)
        var = (acc.sum_front_sq - acc.alive_count * mean ** 2) / np.maximum(acc.alive_count - 1, 1)
        return np.where(acc.alive_count > 1, np.sqrt(np.maximum(var, 0.0)), np.nan)


def fidelity_from_survival(p1: np.ndarray, k: int,
                           pk: np.ndarray | None = None):
    """Mean decoding fidelity and bounds from survival probabilities.

    For k = 1 the mean is exact: F = 1 - (3/4) P_1(t).  For general k the
    survival of each nontrivial reference stabilizer is bracketed by the
    single-particle and k-particle-block survivals, giving

        1 - (1 - 4^-k) P_k(t)  <=  F(t)  <=  1 - (1 - 4^-k) P_1(t).

    Returns (mean_or_None, lower_or_None, upper); the lower bound requires pk.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p1 = np.asarray(p1, dtype=float)
    if np.any((p1 < 0) | (p1 > 1)):
        raise ValueError("survival probabilities must lie in [0, 1]")
    w = 1.0 - 4.0 ** (-k)
    upper = 1.0 - w * p1
    mean = 1.0 - 0.75 * p1 if k == 1 else None
    lower = None
    if pk is not None:
        pk = np.asarray(pk, dtype=float)
        if np.any((pk < 0) | (pk > 1)):
            raise ValueError("survival probabilities must lie in [0, 1]")
        lower = 1.0 - w * pk
    return mean, lower, upper
