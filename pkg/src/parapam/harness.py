"""Sweeps over the (seed, eps) lattice and the files they produce."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, noise, torus
from .config import RunConfig
from .littlewood_paley import Trajectory, parabolic_norm
from .noise import EnhancedNoise
from .solver import BlowUpError, SolverConfig, default_dt, integrate, model

log = logging.getLogger(__name__)

CONVERGE_COLUMNS = ("seed", "n", "eps", "alpha", "beta", "c_eps", "D_sup", "D_parab",
                    "gap_naive", "status")
DIAGNOSTICS_COLUMNS = ("seed", "n", "eps", "alpha", "beta", "triple_norm", "weighted_sharp",
                       "raw_u_2beta", "sharp_over_raw")
RENORM_COLUMNS = ("seed", "n", "eps", "alpha", "beta", "c_eps")


def initial_condition(n: int) -> np.ndarray:
    x1, _ = torus.grid_for(n).points
    return np.cos(x1)


def smooth_forcing(n: int) -> np.ndarray:
    x1, x2 = torus.grid_for(n).points
    return np.cos(x1) * np.sin(2 * x2) + 0.5 * np.sin(x2)


def enhanced_for(cfg: RunConfig, seed: int, eps: float) -> EnhancedNoise:
    if cfg.forcing == "none":
        return EnhancedNoise.from_forcing(np.zeros((cfg.n, cfg.n)), eps=eps, c_eps=0.0)
    if cfg.forcing == "smooth":
        return EnhancedNoise.from_forcing(smooth_forcing(cfg.n), eps=eps, c_eps=0.0)
    return noise.enhanced_noise(seed, cfg.n, eps)


def time_grid(cfg: RunConfig, eps_values) -> tuple:
    """Common (dt, stride) for all eps so snapshots line up across the sweep."""
    coeffs = model(cfg.model)
    dt = cfg.dt if cfg.dt is not None else min(default_dt(e, cfg.n, coeffs.a_max) for e in eps_values)
    steps = int(np.ceil(cfg.T / dt - 1e-9))
    dt = cfg.T / steps
    stride = max(1, steps // cfg.snapshots)
    while steps % stride:
        stride -= 1
    return dt, stride


def solver_config(cfg: RunConfig, eps: float, dt: float, stride: int, renormalize=None) -> SolverConfig:
    return SolverConfig(cfg.n, cfg.T, dt, eps,
                        cfg.renormalize if renormalize is None else renormalize,
                        cfg.scheme, stride)


def provenance(cfg: RunConfig, seed: int, eps: float) -> dict:
    return {"seed": seed, "n": cfg.n, "eps": eps, "alpha": cfg.alpha, "beta": cfg.beta}


@dataclass
class SeedSweep:
    seed: int
    converge_rows: list
    diagnostics_rows: list


def sweep_seed(cfg: RunConfig, seed: int) -> SeedSweep:
    """Renormalized and naive runs at every eps (plus eps_min/2 for the last difference)."""
    coeffs = model(cfg.model)
    eps_runs = tuple(cfg.eps) + (cfg.eps[-1] / 2.0,)
    dt, stride = time_grid(cfg, eps_runs)
    u0 = initial_condition(cfg.n)
    runs, gaps, status, cs = {}, {}, {}, {}
    diag_rows = []
    for eps in eps_runs:
        enh = enhanced_for(cfg, seed, eps)
        cs[eps] = enh.c_eps
        try:
            on = integrate(u0, enh, coeffs, solver_config(cfg, eps, dt, stride, True))
            off = integrate(u0, enh, coeffs, solver_config(cfg, eps, dt, stride, False))
        except BlowUpError as exc:
            log.warning("seed %d eps %g: %s", seed, eps, exc)
            status[eps] = f"blowup@{exc.last_time:.6g}"
            runs[eps] = None
            continue
        status[eps] = "ok"
        runs[eps] = on
        gaps[eps] = float(np.abs(on.values - off.values).max())
        diag_rows.append(diagnostics_row(cfg, seed, eps, on, enh))
    rows = []
    for eps, half in zip(eps_runs[:-1], eps_runs[1:]):
        row = {**provenance(cfg, seed, eps), "c_eps": cs[eps], "D_sup": np.nan, "D_parab": np.nan,
               "gap_naive": gaps.get(eps, np.nan), "status": status[eps]}
        if runs[eps] is not None and runs[half] is not None:
            diff = Trajectory(runs[eps].times, runs[eps].values - runs[half].values)
            row["D_sup"] = float(np.abs(diff.values).max())
            row["D_parab"] = parabolic_norm(diff, cfg.alpha)
        elif status[eps] == "ok":
            row["status"] = f"partner {status[half]}"
        rows.append(row)
    return SeedSweep(seed, rows, diag_rows)


def run_lattice(cfg: RunConfig, fn) -> list:
    """Apply ``fn(cfg, seed)`` over seeds, in parallel when workers > 1; ordered by seed."""
    if cfg.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, [cfg] * len(cfg.seeds), cfg.seeds))
    return [fn(cfg, s) for s in cfg.seeds]


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row[k]) for k in columns})
    return path


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def eps_tag(eps: float) -> str:
    return f"{eps:.6e}"


def noise_filename(seed: int, n: int, eps: float, component: str) -> str:
    return f"noise_seed{seed}_n{n}_eps{eps_tag(eps)}_{component}.pfld"


def write_noise(cfg: RunConfig, seed: int) -> list:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for eps in cfg.eps:
        enh = noise.enhanced_noise(seed, cfg.n, eps)
        for comp, field in (("xi", enh.xi_eps), ("X", enh.X_eps), ("resonant_ren", enh.resonant_ren)):
            torus.write_pfld(out / noise_filename(seed, cfg.n, eps, comp), field)
        rows.append({**provenance(cfg, seed, eps), "c_eps": enh.c_eps})
    return rows


def content_hash(cfg: RunConfig, u0: np.ndarray, xi: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(cfg.echo(), sort_keys=True, default=list).encode())
    h.update(np.ascontiguousarray(u0, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(xi, dtype="<f8").tobytes())
    return h.hexdigest()


def write_trajectory(path, traj: Trajectory, manifest: dict) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    names = []
    for m, snap in enumerate(traj.values):
        name = f"u_{m:05d}.pfld"
        torus.write_pfld(path / name, snap)
        names.append(name)
    manifest = {**manifest, "times": [float(t) for t in traj.times], "files": names}
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def read_trajectory(path) -> tuple:
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"{path}: missing manifest.json")
    manifest = json.loads(manifest_path.read_text())
    values = []
    for name in manifest["files"]:
        f = path / name
        if not f.exists():
            raise FileNotFoundError(f"{f}: missing trajectory snapshot")
        values.append(torus.read_pfld(f))
    return Trajectory(np.array(manifest["times"]), np.array(values)), manifest


def solve_single(cfg: RunConfig):
    """One run at (seeds[0], eps[0]); returns (trajectory, manifest, enhanced)."""
    seed, eps = cfg.seeds[0], cfg.eps[0]
    coeffs = model(cfg.model)
    dt, stride = time_grid(cfg, (eps,))
    enh = enhanced_for(cfg, seed, eps)
    u0 = initial_condition(cfg.n)
    scfg = solver_config(cfg, eps, dt, stride)
    traj = integrate(u0, enh, coeffs, scfg)
    manifest = {
        "config": cfg.echo(),
        "seed": seed,
        "eps": eps,
        "dt": dt,
        "stride": stride,
        "c_eps": enh.c_eps if scfg.renormalize else 0.0,
        "scheme": cfg.scheme,
        "model": cfg.model,
        "input_hash": content_hash(cfg, u0, enh.xi_eps),
    }
    return traj, manifest, enh


def diagnose_seed(cfg: RunConfig, seed: int) -> list:
    coeffs = model(cfg.model)
    dt, stride = time_grid(cfg, cfg.eps)
    u0 = initial_condition(cfg.n)
    rows = []
    for eps in cfg.eps:
        enh = enhanced_for(cfg, seed, eps)
        try:
            traj = integrate(u0, enh, coeffs, solver_config(cfg, eps, dt, stride))
        except BlowUpError as exc:
            log.warning("seed %d eps %g: %s", seed, eps, exc)
            continue
        rows.append(diagnostics_row(cfg, seed, eps, traj, enh))
    return rows


def diagnostics_row(cfg: RunConfig, seed: int, eps: float, traj: Trajectory, enh: EnhancedNoise) -> dict:
    rep = diagnostics.report(diagnostics.decompose(traj, enh, model(cfg.model), cfg.alpha, cfg.beta))
    return {**provenance(cfg, seed, eps), "triple_norm": rep.triple_norm,
            "weighted_sharp": rep.weighted_sharp, "raw_u_2beta": rep.raw_u_2beta,
            "sharp_over_raw": rep.sharp_over_raw}
