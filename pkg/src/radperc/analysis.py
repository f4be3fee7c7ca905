"""Critical-point estimation, exponent fits, scaling collapses and mean field.

Conventions: exponents are slopes of least-squares lines in natural-log space;
the default fit window [16, depth/4] skips microscopic transients and
finite-size saturation.  Collapse quality is scored as the mean per-bin
variance of log y across curves after binning in the scaled abscissa.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ExponentTable:
    """Accepted directed-percolation constants (1+1 dimensions)."""

    theta: float = 0.3136
    delta: float = 0.1595
    z: float = 1.581
    nu_par: float = 1.734
    nu_perp: float = 1.097

    @property
    def collapse_exponent_otoc(self) -> float:
        # vertical OTOC exponent (beta + beta')/nu_par = 2*delta by
        # rapidity-reversal symmetry (beta = beta', delta = beta/nu_par)
        return 2.0 * self.delta


DP_EXPONENTS = ExponentTable()


@dataclass(frozen=True)
class MeanFieldResult:
    q: float
    p: float
    rho_e: float
    rho_v: float
    P_r: float
    P_l: float
    P_d: float
    v_B: float
    p_c_mf: float
    beyond_threshold: bool


def mean_field(q, p: float) -> MeanFieldResult:
    """Uncorrelated steady-state densities and the light-cone velocity.

    rho_e = (q^2 - 1 - 2p q^2) / ((1-p) q^2)
    rho_v = (q^2 + 1)(q^2 - 1 - 2p q^2) / ((1-p)^2 q^4)
    p_c_mf = (1 - q^-2) / 2
    v_B = P_r - P_l - (2/rho_v) P_d  (rightmost-particle biased walk)

    Past the mean-field threshold the densities turn nonpositive and the
    velocity is reported as NaN with the flag set.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    q2 = float(q) * float(q)
    rho_e = (q2 - 1 - 2 * p * q2) / ((1 - p) * q2)
    rho_v = (q2 + 1) * (q2 - 1 - 2 * p * q2) / ((1 - p) ** 2 * q2 * q2)
    p_c_mf = 0.5 * (1 - 1 / q2)
    P_r = (1 - p) * q2 / (q2 + 1)
    P_l = (1 - p) / (q2 + 1) + p * (1 - p) * (q2 - 1) / (q2 + 1)
    P_d = p * p * (q2 - 1) / (q2 + 1) + 2 * p / (q2 + 1)
    beyond = rho_v <= 0
    v_B = float("nan") if beyond else P_r - P_l - (2.0 / rho_v) * P_d
    return MeanFieldResult(q, p, rho_e, rho_v, P_r, P_l, P_d, v_B, p_c_mf, beyond)


@dataclass
class FitResult:
    exponent: float
    amplitude: float
    window: tuple[float, float]
    goodness: float
    p_c: float | None = None
    details: dict = field(default_factory=dict)


def default_window(depth: int) -> tuple[float, float]:
    return (16.0, depth / 4.0)


def _window_mask(t: np.ndarray, y: np.ndarray, window) -> np.ndarray:
    lo, hi = window
    return (t >= lo) & (t <= hi) & (y > 0) & np.isfinite(y)


def fit_power_law(t: np.ndarray, y: np.ndarray, window) -> FitResult:
    """Least-squares line on (log t, log y); the exponent is the slope."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = _window_mask(t, y, window)
    if sel.sum() < 2:
        raise ValueError("fewer than two positive points in the fit window")
    lt, ly = np.log(t[sel]), np.log(y[sel])
    slope, intercept = np.polyfit(lt, ly, 1)
    resid = ly - (slope * lt + intercept)
    return FitResult(exponent=float(slope), amplitude=float(np.exp(intercept)),
                     window=(float(window[0]), float(window[1])),
                     goodness=float((resid ** 2).sum()))


def _log_quadratic(t: np.ndarray, y: np.ndarray, window) -> tuple[float, float, float]:
    """Fit log y = a u^2 + b u + c with u = log t centered on the window.

    Centering makes b the average log-log slope over the window and a the
    curvature, which is the quantity driven to zero at the critical point.
    """
    sel = _window_mask(np.asarray(t, float), np.asarray(y, float), window)
    if sel.sum() < 3:
        raise ValueError("fewer than three positive points in the fit window")
    u = np.log(np.asarray(t, float)[sel])
    u = u - u.mean()
    ly = np.log(np.asarray(y, float)[sel])
    a, b, c = np.polyfit(u, ly, 2)
    return float(a), float(b), float(c)


def estimate_pc(curves_by_p: dict[float, tuple[np.ndarray, np.ndarray]],
                window) -> FitResult:
    """Critical point from the straightest log-log density curve.

    Each rho(t) curve gets a quadratic fit in log-log space over the window;
    the curvature decreases through zero as p crosses the transition, and the
    estimate interpolates the zero crossing linearly between the bracketing
    grid points.  The reported exponent is the interpolated linear
    coefficient (the average slope) at the estimate.
    """
    if len(curves_by_p) < 3:
        raise ValueError("need at least three p values bracketing the transition")
    ps = np.array(sorted(curves_by_p))
    curv = np.empty(ps.size)
    slope = np.empty(ps.size)
    for i, p in enumerate(ps):
        t, y = curves_by_p[p]
        a, b, _ = _log_quadratic(t, y, window)
        curv[i] = a
        slope[i] = b
    sign_change = np.nonzero((curv[:-1] > 0) & (curv[1:] <= 0))[0]
    if sign_change.size == 0:
        raise ValueError("curvature does not change sign across the p grid")
    i = int(sign_change[0])
    f = curv[i] / (curv[i] - curv[i + 1])
    p_c = float(ps[i] + f * (ps[i + 1] - ps[i]))
    theta = float(slope[i] + f * (slope[i + 1] - slope[i]))
    return FitResult(exponent=theta, amplitude=float("nan"),
                     window=(float(window[0]), float(window[1])),
                     goodness=float(np.min(np.abs(curv))), p_c=p_c,
                     details={"p_grid": ps.tolist(), "curvature": curv.tolist(),
                              "slope": slope.tolist()})


OBSERVABLE_EXPONENT = {"rho": "theta", "P": "-delta", "R2": "theta+2/z"}


def observable_exponent(observable: str, exps: ExponentTable) -> float:
    if observable == "rho":
        return exps.theta
    if observable == "P":
        return -exps.delta
    if observable == "R2":
        return exps.theta + 2.0 / exps.z
    raise ValueError(f"unknown observable {observable!r}")


def rescale_collapse(curves_by_p: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]],
                     p_c: float, exps: ExponentTable, observable: str,
                     t_min: float = 1.0) -> list[dict]:
    """Finite-time scaling data for one observable, both branches.

    For an observable scaling as t^y at criticality, each off-critical curve
    is mapped to (t*|p-p_c|^nu_par, y(t)*|p-p_c|^(y*nu_par)); curves sharing a
    branch should then fall on one universal function.  Rows also carry the
    scaled sem.
    """
    y_exp = observable_exponent(observable, exps)
    rows = []
    for p, (t, y, sem) in sorted(curves_by_p.items()):
        if p == p_c:
            raise ValueError("collapse requires p != p_c on every curve")
        delta = abs(p - p_c)
        branch = "below" if p < p_c else "above"
        xs = np.asarray(t, float) * delta ** exps.nu_par
        scale = delta ** (y_exp * exps.nu_par)
        sel = (np.asarray(t, float) >= t_min) & np.isfinite(y)
        for tt, xv, yv, sv in zip(np.asarray(t, float)[sel], xs[sel],
                                  np.asarray(y, float)[sel] * scale,
                                  np.asarray(sem, float)[sel] * scale):
            rows.append({"observable": observable, "branch": branch, "p": p,
                         "t": tt, "x_scaled": xv, "y_scaled": yv,
                         "y_sem_scaled": sv})
    return rows


def rescale_otoc_profiles(otoc: np.ndarray, times, exps: ExponentTable,
                          N: int, origin: int = 0) -> list[dict]:
    """Critical OTOC profiles: (x t^-1/z, C(x,t) t^(2 delta)) per time slice."""
    disp = (np.arange(N) - origin + N // 2) % N - N // 2
    rows = []
    for t in times:
        prof = otoc[t]
        xs = disp * float(t) ** (-1.0 / exps.z)
        ys = prof * float(t) ** exps.collapse_exponent_otoc
        order = np.argsort(disp)
        for xv, yv, x_raw in zip(xs[order], ys[order], disp[order]):
            rows.append({"observable": "otoc", "branch": "critical", "p": np.nan,
                         "t": float(t), "x_scaled": float(xv),
                         "y_scaled": float(yv), "y_sem_scaled": np.nan,
                         "x_raw": int(x_raw)})
    return rows


def collapse_metric(rows: list[dict], n_bins: int = 24) -> float:
    """Mean per-bin variance of log y across curves, log-binned in x.

    Only bins where at least two distinct curves contribute are counted.
    Smaller is better; the unrescaled baseline feeds raw (t, y) through the
    same computation.
    """
    by_curve: dict[float, list[tuple[float, float]]] = {}
    for r in rows:
        if r["y_scaled"] > 0 and np.isfinite(r["x_scaled"]) and r["x_scaled"] > 0:
            by_curve.setdefault(r["p"], []).append((r["x_scaled"], r["y_scaled"]))
    if len(by_curve) < 2:
        raise ValueError("need at least two curves to score a collapse")
    all_x = np.concatenate([[x for x, _ in pts] for pts in by_curve.values()])
    lo, hi = np.log(all_x.min()), np.log(all_x.max())
    edges = np.linspace(lo, hi + 1e-12, n_bins + 1)
    bin_values: list[list[float]] = [[] for _ in range(n_bins)]
    for pts in by_curve.values():
        x = np.log([p[0] for p in pts])
        ly = np.log([p[1] for p in pts])
        idx = np.clip(np.digitize(x, edges) - 1, 0, n_bins - 1)
        for b in range(n_bins):
            sel = idx == b
            if sel.any():
                bin_values[b].append(float(ly[sel].mean()))
    variances = [np.var(v) for v in bin_values if len(v) >= 2]
    if not variances:
        raise ValueError("no bins with two or more curves; ranges do not overlap")
    return float(np.mean(variances))


def unrescaled_rows(curves_by_p, observable: str, t_min: float = 1.0) -> list[dict]:
    """Baseline rows: same structure as rescale_collapse with unit scale factors."""
    rows = []
    for p, (t, y, sem) in sorted(curves_by_p.items()):
        t = np.asarray(t, float)
        sel = (t >= t_min) & np.isfinite(y)
        for tt, yv, sv in zip(t[sel], np.asarray(y, float)[sel],
                              np.asarray(sem, float)[sel]):
            rows.append({"observable": observable, "branch": "raw", "p": p,
                         "t": tt, "x_scaled": tt, "y_scaled": yv,
                         "y_sem_scaled": sv})
    return rows


def measure_velocity(t: np.ndarray, front_mean: np.ndarray,
                     front_std: np.ndarray, window) -> tuple[FitResult, FitResult]:
    """Light-cone velocity and front-width growth exponent.

    Velocity: least-squares slope of the mean front position over the window.
    Width exponent: log-log slope of the across-trajectory front standard
    deviation (0.5 for diffusive broadening).
    """
    t = np.asarray(t, dtype=float)
    lo, hi = window
    sel = (t >= lo) & (t <= hi) & np.isfinite(front_mean)
    if sel.sum() < 2:
        raise ValueError("nonsurviving ensemble in the velocity window")
    v, b = np.polyfit(t[sel], np.asarray(front_mean, float)[sel], 1)
    resid = np.asarray(front_mean, float)[sel] - (v * t[sel] + b)
    vel = FitResult(exponent=float(v), amplitude=float(b),
                    window=(float(lo), float(hi)), goodness=float((resid ** 2).sum()))
    width = fit_power_law(t, np.asarray(front_std, float), window)
    return vel, width
