"""Experiment orchestration: config, deterministic parallel ensembles, CSV output.

Reproducibility contract: every batch of trajectories owns a counter-based
random stream keyed on (seed, mode, p-index, batch-index) through Philox, and
partial results merge in batch order, so outputs are byte-identical for a
given (config, seed) regardless of the worker count.

CSV schemas (headers are part of the public interface):

    curves.csv    t,rho,rho_sem,P,P_sem,R2,R2_sem,front,front_sem
    curves_extra.csv  t,R2_massnorm,R2_massnorm_sem
    otoc.csv      t,x,C_mean,C_sem
    info.csv      p,t,Ic_E_mean,Ic_E_sem,Ic_S_mean,Ic_S_sem,F_mean,F_sem
    meanfield.csv q,p,rho_e,rho_v,P_r,P_l,P_d,v_B,p_c_mf
    fit.csv       observable,window_lo,window_hi,exponent,amplitude,goodness,p_c
    collapse.csv  observable,branch,p,t,x_scaled,y_scaled,y_sem_scaled

Floats are serialized with 17 significant digits for round-trip exactness.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, dp, observables
from .clifford import CircuitParams, otoc_ensemble_batch
from .stabilizer import InitCase, geometric_record_times, info_trajectories

MODES = ("otoc", "dp", "decode", "info", "meanfield", "fit", "collapse")

CURVES_HEADER = "t,rho,rho_sem,P,P_sem,R2,R2_sem,front,front_sem"
EXTRA_HEADER = "t,R2_massnorm,R2_massnorm_sem"
OTOC_HEADER = "t,x,C_mean,C_sem"
INFO_HEADER = "p,t,Ic_E_mean,Ic_E_sem,Ic_S_mean,Ic_S_sem,F_mean,F_sem"
MEANFIELD_HEADER = "q,p,rho_e,rho_v,P_r,P_l,P_d,v_B,p_c_mf"
FIT_HEADER = "observable,window_lo,window_hi,exponent,amplitude,goodness,p_c"
COLLAPSE_HEADER = "observable,branch,p,t,x_scaled,y_scaled,y_sem_scaled"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    mode: str = "dp"
    N: int = 64
    depth: int = 64
    p: tuple[float, ...] = (0.1,)
    q: float = 2
    k: int = 1
    init: str = "single:0"
    case: str = "i"
    n_traj: int = 1000
    seed: int = 0
    workers: int = 0            # 0 -> RADPERC_WORKERS or 1
    batch: int = 512
    output_dir: str = "out"
    trace_rho_xb2: float = 1.0
    record_every: int = 0       # info/decode sampling stride; 0 -> geometric grid
    observable: str = "rho"     # fit mode
    window_lo: float = 0.0      # fit/collapse; 0 -> default window
    window_hi: float = 0.0
    input_dir: str = ""         # fit/collapse input
    p_c: float = 0.0            # collapse; 0 -> estimate from the input family
    save_otoc: bool = True

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get("RADPERC_WORKERS", "")
        return int(env) if env.isdigit() and int(env) > 0 else 1

    def window(self) -> tuple[float, float]:
        if self.window_lo > 0 and self.window_hi > 0:
            return (self.window_lo, self.window_hi)
        return analysis.default_window(self.depth)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "p":
        return tuple(float(v) for v in raw.split(",") if v.strip() != "")
    if key == "q":
        return math.inf if raw.lower() in ("inf", "infinity") else float(raw)
    if key == "save_otoc":
        return raw.lower() in ("1", "true", "yes")
    typ = _FIELD_TYPES.get(key)
    if typ in ("int", int):
        return int(raw)
    if typ in ("float", float):
        return float(raw)
    return raw


def parse_config_file(path: str | Path) -> dict:
    """Flat key=value file; '#' starts a comment; later keys win."""
    out: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Config file values overlaid by command-line values (flag wins)."""
    merged: dict = {}
    merged.update(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    if cfg.mode in ("otoc", "dp", "decode", "info"):
        if cfg.N <= 0 or cfg.N % 2:
            raise ConfigError("N must be positive and even")
        if cfg.depth < 1:
            raise ConfigError("depth must be >= 1")
        if not cfg.p:
            raise ConfigError("need at least one p value")
        for p in cfg.p:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"swap rate {p} outside [0, 1]")
        if cfg.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        if cfg.batch < 1:
            raise ConfigError("batch must be >= 1")
    if cfg.mode == "otoc" and cfg.q != 2:
        raise ConfigError("the Clifford engine is defined for q = 2 only")
    if cfg.mode in ("dp",) and cfg.q != math.inf and (cfg.q < 2 or cfg.q != int(cfg.q)):
        raise ConfigError("q must be an integer >= 2 or inf")
    if cfg.mode in ("decode", "info"):
        if not 1 <= cfg.k <= cfg.N:
            raise ConfigError("need 1 <= k <= N")
        if cfg.case not in ("i", "ii", "iii"):
            raise ConfigError("case must be one of i, ii, iii")
        if cfg.mode == "decode" and cfg.case != "i":
            raise ConfigError("decode mode requires case i")
    if cfg.mode in ("fit", "collapse") and not cfg.input_dir:
        raise ConfigError(f"{cfg.mode} mode requires input_dir")
    parse_init(cfg.init, cfg.N)


def parse_init(spec: str, N: int) -> dp.InitialCondition:
    """'single:X0' | 'block:K:ORIGIN' | 'custom:0101...'"""
    parts = spec.split(":")
    try:
        if parts[0] == "single":
            return dp.SingleSite(int(parts[1]) if len(parts) > 1 else 0)
        if parts[0] == "block":
            return dp.Block(int(parts[1]), int(parts[2]) if len(parts) > 2 else 0)
        if parts[0] == "custom":
            return dp.Custom(tuple(int(c) for c in parts[1]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad init spec {spec!r}: {exc}") from exc
    raise ConfigError(f"bad init spec {spec!r}")


# ----------------------------------------------------------------------
# Deterministic streams and parallel batches
# ----------------------------------------------------------------------

def batch_stream(seed: int, mode_tag: int, p_index: int,
                 batch_index: int) -> np.random.Generator:
    """Counter-based (Philox) stream for one batch of trajectories."""
    ss = np.random.SeedSequence(seed, spawn_key=(mode_tag, p_index, batch_index))
    return np.random.Generator(np.random.Philox(ss))


def batch_sizes(n_traj: int, batch: int) -> list[int]:
    full, rest = divmod(n_traj, batch)
    return [batch] * full + ([rest] if rest else [])


def _curve_batch(args) -> observables.EnsembleAccumulator:
    cfg_dict, p, p_index, b_index, b_size = args
    cfg = ExperimentConfig(**cfg_dict)
    init = parse_init(cfg.init, cfg.N)
    acc = observables.EnsembleAccumulator(cfg.N, cfg.depth,
                                          origin=dp.init_origin(init, cfg.N),
                                          keep_matrix=cfg.save_otoc)
    rng = batch_stream(cfg.seed, MODES.index(cfg.mode), p_index, b_index)
    if cfg.mode == "otoc":
        params = CircuitParams(cfg.N, p, cfg.depth, cfg.seed)
        x0 = init.x0 if isinstance(init, dp.SingleSite) else 0
        otoc_ensemble_batch(params, b_size, rng, acc, x0=x0)
    else:
        params = dp.branching_probs(cfg.q, p)
        dp.dp_ensemble_batch(params, cfg.N, cfg.depth, b_size, rng, acc, init)
    return acc


def _info_batch(args) -> dict:
    cfg_dict, p, p_index, b_index, b_size = args
    cfg = ExperimentConfig(**cfg_dict)
    case = {"i": InitCase.MIXED_S2_MIXED_E, "ii": InitCase.PURE_S2_MIXED_E,
            "iii": InitCase.PURE_ALL}[cfg.case]
    rng = batch_stream(cfg.seed, MODES.index(cfg.mode), p_index, b_index)
    times = record_times_for(cfg)
    want_f = case is not InitCase.PURE_S2_MIXED_E
    res = info_trajectories(case, cfg.N, cfg.k, p, cfg.depth, b_size, rng,
                            times, want_info=True, want_fidelity=want_f)
    out = {"t": res["t"], "n": b_size}
    ic_e = res["Ic_E"].astype(float)
    ic_s = res["Ic_S"].astype(float)
    out["sum_Ic_E"] = ic_e.sum(axis=0)
    out["sum_Ic_E_sq"] = (ic_e ** 2).sum(axis=0)
    out["sum_Ic_S"] = ic_s.sum(axis=0)
    out["sum_Ic_S_sq"] = (ic_s ** 2).sum(axis=0)
    if want_f:
        f = 2.0 ** res["log2_F"].astype(float)
        out["sum_F"] = f.sum(axis=0)
        out["sum_F_sq"] = (f ** 2).sum(axis=0)
    return out


def record_times_for(cfg: ExperimentConfig) -> list[int]:
    if cfg.record_every > 0:
        return list(range(0, cfg.depth + 1, cfg.record_every))
    return geometric_record_times(cfg.depth)


def _run_batches(cfg: ExperimentConfig, worker_fn, p: float, p_index: int):
    sizes = batch_sizes(cfg.n_traj, cfg.batch)
    args = [(dataclasses.asdict(cfg), p, p_index, i, s) for i, s in enumerate(sizes)]
    n_workers = cfg.effective_workers()
    if n_workers == 1 or len(args) == 1:
        return [worker_fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker_fn, args))


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path: Path, header: str, rows) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    os.replace(tmp, path)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, cfg: ExperimentConfig, files: list[Path],
                   wall_time: float) -> None:
    manifest = {
        "config": {k: (str(v) if isinstance(v, float) and math.isinf(v) else v)
                   for k, v in dataclasses.asdict(cfg).items()},
        "code_version": __version__,
        "wall_time_s": round(wall_time, 3),
        "time_convention": "one time unit = one gate layer plus its swap round; "
                           "one space unit = one site",
        "checksums": {str(f.relative_to(out_dir)): _sha256(f) for f in files},
    }
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, out_dir / "manifest.json")


# ----------------------------------------------------------------------
# Modes
# ----------------------------------------------------------------------

def _curves_rows(cur: observables.Curves):
    for i in range(cur.t.size):
        yield (cur.t[i], cur.rho[i], cur.rho_sem[i], cur.surv[i], cur.surv_sem[i],
               cur.r2[i], cur.r2_sem[i], cur.front[i], cur.front_sem[i])


def _run_curve_mode(cfg: ExperimentConfig, out: Path) -> list[Path]:
    files = []
    multi = len(cfg.p) > 1
    for p_index, p in enumerate(cfg.p):
        accs = _run_batches(cfg, _curve_batch, p, p_index)
        total = accs[0]
        for a in accs[1:]:
            total = total.merge(a)
        cur = observables.finalize(total, q=cfg.q, trace_rho_Xb2=cfg.trace_rho_xb2)
        sub = out / f"p={p:.5f}" if multi else out
        sub.mkdir(parents=True, exist_ok=True)
        write_csv(sub / "curves.csv", CURVES_HEADER, _curves_rows(cur))
        files.append(sub / "curves.csv")
        write_csv(sub / "curves_extra.csv", EXTRA_HEADER,
                  ((cur.t[i], cur.r2_massnorm[i], cur.r2_massnorm_sem[i])
                   for i in range(cur.t.size)))
        files.append(sub / "curves_extra.csv")
        if cur.otoc is not None:
            write_csv(sub / "otoc.csv", OTOC_HEADER,
                      ((t, x, cur.otoc[t, x], cur.otoc_sem[t, x])
                       for t in range(cfg.depth + 1) for x in range(cfg.N)))
            files.append(sub / "otoc.csv")
    return files


def _run_info_mode(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = []
    for p_index, p in enumerate(cfg.p):
        parts = _run_batches(cfg, _info_batch, p, p_index)
        t = parts[0]["t"]
        n = sum(q["n"] for q in parts)
        tot = {key: sum(q[key] for q in parts)
               for key in parts[0] if key not in ("t", "n")}

        def stat(prefix):
            mean = tot[f"sum_{prefix}"] / n
            var = np.maximum(tot[f"sum_{prefix}_sq"] / n - mean ** 2, 0.0)
            sem = np.sqrt(var / n) if n > 1 else np.zeros_like(mean)
            return mean, sem

        e_mean, e_sem = stat("Ic_E")
        s_mean, s_sem = stat("Ic_S")
        if "sum_F" in tot:
            f_mean, f_sem = stat("F")
        else:
            f_mean = np.full_like(e_mean, np.nan)
            f_sem = np.full_like(e_mean, np.nan)
        for i, ti in enumerate(t):
            rows.append((p, ti, e_mean[i], e_sem[i], s_mean[i], s_sem[i],
                         f_mean[i], f_sem[i]))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "info.csv", INFO_HEADER, rows)
    return [out / "info.csv"]


def _run_meanfield_mode(cfg: ExperimentConfig, out: Path) -> list[Path]:
    rows = []
    for p in cfg.p:
        mf = analysis.mean_field(cfg.q, p)
        rows.append((mf.q, mf.p, mf.rho_e, mf.rho_v, mf.P_r, mf.P_l, mf.P_d,
                     mf.v_B, mf.p_c_mf))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "meanfield.csv", MEANFIELD_HEADER, rows)
    return [out / "meanfield.csv"]


def read_curves(path: Path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def _curve_family(input_dir: Path) -> dict[float, dict[str, np.ndarray]]:
    family = {}
    for sub in sorted(input_dir.glob("p=*")):
        if (sub / "curves.csv").exists():
            family[float(sub.name.split("=", 1)[1])] = read_curves(sub / "curves.csv")
    if not family and (input_dir / "curves.csv").exists():
        raise ConfigError(f"{input_dir} holds a single run; need a p-grid family")
    if not family:
        raise ConfigError(f"no curves.csv files under {input_dir}")
    return family


_OBS_COLUMN = {"rho": ("rho", "rho_sem"), "P": ("P", "P_sem"), "R2": ("R2", "R2_sem")}


def _run_fit_mode(cfg: ExperimentConfig, out: Path) -> list[Path]:
    input_dir = Path(cfg.input_dir)
    window = cfg.window()
    rows = []
    if (input_dir / "curves.csv").exists():
        cur = read_curves(input_dir / "curves.csv")
        for obs, (col, _) in _OBS_COLUMN.items():
            fit = analysis.fit_power_law(cur["t"], cur[col], window)
            rows.append((obs, fit.window[0], fit.window[1], fit.exponent,
                         fit.amplitude, fit.goodness, float("nan")))
    else:
        family = _curve_family(input_dir)
        est = analysis.estimate_pc({p: (c["t"], c["rho"]) for p, c in family.items()},
                                   window)
        rows.append(("rho_curvature", est.window[0], est.window[1], est.exponent,
                     est.amplitude, est.goodness, est.p_c))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "fit.csv", FIT_HEADER, rows)
    return [out / "fit.csv"]


def _run_collapse_mode(cfg: ExperimentConfig, out: Path) -> list[Path]:
    input_dir = Path(cfg.input_dir)
    family = _curve_family(input_dir)
    window = cfg.window()
    p_c = cfg.p_c
    if p_c <= 0:
        p_c = analysis.estimate_pc({p: (c["t"], c["rho"]) for p, c in family.items()},
                                   window).p_c
    rows = []
    for obs, (col, sem_col) in _OBS_COLUMN.items():
        fam = {p: (c["t"], c[col], c[sem_col]) for p, c in family.items()
               if abs(p - p_c) > 1e-9}
        rows.extend(analysis.rescale_collapse(fam, p_c, analysis.DP_EXPONENTS, obs))
    # OTOC profile slices from the grid point nearest the critical rate
    nearest = min(family, key=lambda p: abs(p - p_c))
    otoc_path = input_dir / f"p={nearest:.5f}" / "otoc.csv"
    if otoc_path.exists():
        raw = np.genfromtxt(otoc_path, delimiter=",", names=True)
        ts = np.unique(raw["t"].astype(int))
        N = int(raw["x"].max()) + 1
        depth = ts.max()
        otoc = np.zeros((depth + 1, N))
        otoc[raw["t"].astype(int), raw["x"].astype(int)] = raw["C_mean"]
        lo = min(8, max(1, depth))
        slices = [int(t) for t in np.unique(np.geomspace(lo, depth, 5).astype(int))
                  if 1 <= t <= depth]
        rows.extend(analysis.rescale_otoc_profiles(otoc, slices,
                                                   analysis.DP_EXPONENTS, N))
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "collapse.csv", COLLAPSE_HEADER,
              ((r["observable"], r["branch"], r["p"], r["t"], r["x_scaled"],
                r["y_scaled"], r["y_sem_scaled"]) for r in rows))
    return [out / "collapse.csv"]


def run(cfg: ExperimentConfig) -> Path:
    """Execute the configured experiment; returns the output directory."""
    validate(cfg)
    t0 = time.monotonic()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode in ("otoc", "dp"):
        files = _run_curve_mode(cfg, out)
    elif cfg.mode in ("decode", "info"):
        files = _run_info_mode(cfg, out)
    elif cfg.mode == "meanfield":
        files = _run_meanfield_mode(cfg, out)
    elif cfg.mode == "fit":
        files = _run_fit_mode(cfg, out)
    else:
        files = _run_collapse_mode(cfg, out)
    write_manifest(out, cfg, files, time.monotonic() - t0)
    return out
