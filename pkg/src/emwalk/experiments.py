"""Config-driven experiment runner: CSV data plus JSON run metadata.

Each experiment is a named sweep over crossed-field walks (or over the
continuum-oracle convergence table) with fixed CSV column layouts, so
downstream plotting can be schema-driven:

    convergence.csv         level, beta, eps, delta
    bloch.csv               epsA_E, j, p_mean
    drift_density.csv       epsA_E, p, q, P          (cropped to support)
    drift_density_pmax.csv  epsA_E, epsA_B, j, P_max
    drift_speed.csv         epsA_E, epsA_B, j, q_front, fitted_speed
    spread_vs_e.csv         epsA_B, epsA_E, j, q_spread
    localization.csv        epsA_B, epsA_E, j, q_spread
    invariants.csv          check, instance, value, threshold, passed

Every run first executes a quick exact-identity suite (unitarity, gauge
invariance, continuity, tensor gauge invariance, double-divergence
identity) and embeds the outcome in metadata.json; physics output is
refused if any identity fails.  Reruns with identical configs produce
byte-identical CSV bodies.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from . import _kernels, __version__
from .current import continuity_residual, current_components
from .dirac import convergence_study
from .errors import NoOscillation
from .gauge import (FieldTensor, SampledPotential, UniformEB, field_tensor,
                    maxwell_identity_check)
from .lattice import FieldHistory, Grid
from .observables import bloch_period, drift_speed
from .walk import SpinorField, WalkParams, evolve, gauge_transform, step

__all__ = [
    "EXPERIMENT_NAMES",
    "ExperimentConfig",
    "RunArtifact",
    "default_params",
    "make_config",
    "validate_config",
    "run_experiment",
    "run_eb_trajectory",
    "invariant_suite",
]

EXPERIMENT_NAMES = (
    "convergence",
    "bloch",
    "drift_density",
    "drift_speed",
    "spread_vs_E",
    "localization",
    "invariants",
)

_PI = math.pi


def default_params(experiment: str) -> dict:
    """Per-experiment defaults; walk scales are eps_m = eps_A = eps_l = 1, m = 1."""
    if experiment == "convergence":
        return {
            "levels": ["+1", "+2", "+3"],
            "betas": [0.0, 0.2, 0.5],
            "eps_exponents": [4, 5, 6, 7, 8, 9],
            "m": 1.0,
            "B": 1.0,
            "order": 4,
            "fit_skip": 2,
            "refine_check": True,
        }
    if experiment == "bloch":
        return {
            "epsA_E": [0.0, 0.02, 0.04, 0.08, 0.16, 0.64],
            "steps": 630,
            "extent": None,
        }
    if experiment == "drift_density":
        return {
            "epsA_E": [0.0, 0.01, 0.02, 0.03, 0.04],
            "epsA_B": 0.16,
            "steps": 500,
            "extent": None,
            "density_floor": 1e-12,
        }
    if experiment == "drift_speed":
        return {
            "epsA_E": [0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
            "epsA_B": 0.16,
            "steps": 500,
            "extent": None,
            "front_prominence": 0.05,
            "transient": 50,
        }
    if experiment == "spread_vs_E":
        return {
            "epsA_E": [i / 100 for i in range(13)],
            "epsA_B": [0.16, 1.0, _PI / 3],
            "snapshots": [100, 500],
            "extent": None,
        }
    if experiment == "localization":
        return {
            "epsA_E": _PI / 2,
            "epsA_B": [0.16, _PI / 4, _PI / 4 + 0.04, _PI / 3, _PI / 3 + 0.04,
                        _PI / 2, _PI / 2 + 0.04],
            "steps": 1000,
            "extent": None,
        }
    if experiment == "invariants":
        return {
            "extent": 16,
            "steps": 8,
            "gauge_instances": 20,
            "gauge_extent": 32,
            "gauge_steps": 10,
            "tensor_instances": 100,
            "shift_instances": 20,
            "seed": 7,
        }
    raise ValueError(f"unknown experiment {experiment!r}")


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    out_dir: Path


@dataclass
class RunArtifact:
    csv_paths: dict
    metadata_path: Path
    metadata: dict


def make_config(experiment: str, out_dir, config_file=None, overrides=None) -> ExperimentConfig:
    """Merge defaults <- optional JSON config file <- explicit overrides."""
    params = default_params(experiment)
    if config_file is not None:
        with open(config_file) as fh:
            loaded = json.load(fh)
        file_experiment = loaded.get("experiment")
        if file_experiment is not None and file_experiment != experiment:
            raise ValueError(
                f"config file is for {file_experiment!r}, requested {experiment!r}"
            )
        params.update(loaded.get("params", {}))
        if out_dir is None and "out_dir" in loaded:
            out_dir = loaded["out_dir"]
    if overrides:
        for key, value in overrides.items():
            if key not in params:
                raise ValueError(f"unknown parameter {key!r} for {experiment}")
            params[key] = value
    if out_dir is None:
        raise ValueError("no output directory given")
    return ExperimentConfig(experiment, params, Path(out_dir))


def validate_config(cfg: ExperimentConfig) -> list[str]:
    """Return diagnostics; an empty list means the config is runnable."""
    diags: list[str] = []
    if cfg.experiment not in EXPERIMENT_NAMES:
        return [f"unknown experiment {cfg.experiment!r}"]
    p = cfg.params
    known = default_params(cfg.experiment)
    for key in p:
        if key not in known:
            diags.append(f"unknown parameter {key!r}")

    def positive(name):
        v = p.get(name)
        if v is not None and (not np.isscalar(v) or v <= 0):
            diags.append(f"{name} must be a positive scalar, got {v!r}")

    if cfg.experiment == "convergence":
        if not p.get("levels"):
            diags.append("levels list is empty")
        exps = p.get("eps_exponents", [])
        if not exps or any(int(k) != k or k < 1 for k in exps):
            diags.append("eps_exponents must be positive integers")
        for b in p.get("betas", []):
            if not 0.0 <= b < 1.0:
                diags.append(f"beta {b} outside [0, 1)")
        positive("m")
        positive("B")
    elif cfg.experiment == "invariants":
        if p.get("extent", 16) < 3:
            diags.append("extent must be >= 3")
    else:
        steps = p.get("steps")
        if steps is None:
            steps = max(p.get("snapshots", [0]))
        if steps <= 0:
            diags.append("steps must be positive")
        extent = p.get("extent")
        if extent is not None and extent < 2 * steps + 3:
            diags.append(
                f"extent {extent} below the light-cone bound {2 * steps + 3} for {steps} steps"
            )
        for name in ("epsA_E", "epsA_B"):
            if name in p:
                vals = p[name] if isinstance(p[name], (list, tuple)) else [p[name]]
                for v in vals:
                    if v < 0:
                        diags.append(f"{name} value {v} is negative")
    parent = cfg.out_dir if cfg.out_dir.exists() else cfg.out_dir.parent
    if parent.exists() and not parent.is_dir():
        diags.append(f"output location {cfg.out_dir} is not a directory")
    return diags


# ---------------------------------------------------------------------------
# trajectory engine with per-step recording


class TrajectoryRecorder:
    """Hook collecting per-step reductions of one walk trajectory.

    States received from ``evolve`` are reused buffers, so everything
    retained here is either a scalar reduction or an explicit copy.
    """

    def __init__(self, grid: Grid, *, eps_a: float = 1.0,
                 track_p_mean: bool = False, track_q_spread: bool = False,
                 track_front: bool = False, front_prominence: float = 0.05,
                 check_continuity: bool = True, snapshot_steps=(),
                 density_floor: float = 1e-12):
        self.grid = grid
        self.inv_eps = 1.0 / eps_a
        self.offsets_p = grid.offsets_p().astype(float)
        self.offsets_q = grid.offsets_q().astype(float)
        self.track_p_mean = track_p_mean
        self.track_q_spread = track_q_spread
        self.track_front = track_front
        self.front_prominence = front_prominence
        self.check_continuity = check_continuity
        self.snapshot_steps = frozenset(snapshot_steps)
        self.density_floor = density_floor

        self.norms: list[float] = []
        self.p_mean: list[float] = []
        self.q_spread: list[float] = []
        self.front_q: list[float] = []
        self.top_front_q: list[float] = []
        self.continuity_max = 0.0
        self.snapshots: dict[int, dict] = {}
        if check_continuity:
            shape = grid.shape
            self._cur = [np.empty(shape) for _ in range(3)]
            self._prev = [np.empty(shape) for _ in range(3)]
            self._have_prev = False

    def __call__(self, j: int, psi: SpinorField, psi_tilde) -> None:
        marg_p, marg_q = _kernels.marginals(psi.minus, psi.plus)
        self.norms.append(float(marg_p.sum()))
        if self.track_p_mean:
            self.p_mean.append(float(np.dot(self.offsets_p, marg_p)))
        if self.track_q_spread:
            self.q_spread.append(float(math.sqrt(np.dot(self.offsets_q ** 2, marg_q))))
        if self.track_front:
            bottom, top = self._fronts(marg_q)
            self.front_q.append(bottom)
            self.top_front_q.append(top)
        if self.check_continuity:
            rho, j1, j2 = self._cur
            if psi_tilde is not None:
                _kernels.current_fields(psi.minus, psi.plus,
                                        psi_tilde.minus, psi_tilde.plus, rho, j1, j2)
            else:
                # final slice: only the density closes the last residual
                _kernels.current_fields(psi.minus, psi.plus,
                                        psi.minus, psi.plus, rho, j1, j2)
            if self._have_prev:
                res = _kernels.continuity_max(self._prev[0], self._prev[1],
                                              self._prev[2], rho, self.inv_eps)
                self.continuity_max = max(self.continuity_max, float(res))
            self._cur, self._prev = self._prev, self._cur
            self._have_prev = True
        if j in self.snapshot_steps:
            self.snapshots[j] = self._crop_density(psi)

    def _fronts(self, marg_q: np.ndarray) -> tuple[float, float]:
        peaks, _ = find_peaks(marg_q, prominence=self.front_prominence * marg_q.max())
        if len(peaks) == 0:
            return math.nan, math.nan

        def refine(i):
            y0, y1, y2 = marg_q[i - 1], marg_q[i], marg_q[i + 1]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0.0 else 0.0
            return float(self.offsets_q[i] + shift)

        return refine(peaks[0]), refine(peaks[-1])

    def _crop_density(self, psi: SpinorField) -> dict:
        dens = (psi.minus.real ** 2 + psi.minus.imag ** 2
                + psi.plus.real ** 2 + psi.plus.imag ** 2)
        rows = np.flatnonzero(dens.max(axis=1) >= self.density_floor)
        cols = np.flatnonzero(dens.max(axis=0) >= self.density_floor)
        r0, r1 = (int(rows[0]), int(rows[-1])) if rows.size else (0, 0)
        c0, c1 = (int(cols[0]), int(cols[-1])) if cols.size else (0, 0)
        return {
            "p0": int(self.offsets_p[r0]),
            "q0": int(self.offsets_q[c0]),
            "density": dens[r0:r1 + 1, c0:c1 + 1].copy(),
            "p_max": float(dens.max()),
        }


def run_eb_trajectory(eps_a_E: float, eps_a_B: float, steps: int, extent=None, *,
                      mass: float = 1.0, track_p_mean: bool = False,
                      track_q_spread: bool = False, track_front: bool = False,
                      front_prominence: float = 0.05, check_continuity: bool = True,
                      snapshot_steps=(), density_floor: float = 1e-12) -> dict:
    """One crossed-field walk from the centred one-site initial condition.

    Walk scales are eps_m = eps_A = eps_l = 1 with m = ``mass``; in this
    setup only the products eps_A*E and eps_A*B matter, so they are the
    sweep knobs.  The grid defaults to the light-cone bound 2*steps + 3.
    """
    if extent is None:
        extent = 2 * steps + 3
    grid = Grid(extent, extent)
    params = WalkParams(m=mass)
    recorder = TrajectoryRecorder(
        grid,
        eps_a=params.eps_A,
        track_p_mean=track_p_mean,
        track_q_spread=track_q_spread,
        track_front=track_front,
        front_prominence=front_prominence,
        check_continuity=check_continuity,
        snapshot_steps=snapshot_steps,
        density_floor=density_floor,
    )
    psi0 = SpinorField.delta(grid)
    evolve(psi0, UniformEB(E=eps_a_E, B=eps_a_B), steps, params, hooks=[recorder])
    norms = np.asarray(recorder.norms)
    return {
        "eps_a_E": eps_a_E,
        "eps_a_B": eps_a_B,
        "steps": steps,
        "extent": extent,
        "norm_drift": float(np.abs(norms - norms[0]).max()),
        "continuity_max": recorder.continuity_max if check_continuity else None,
        "p_mean": np.asarray(recorder.p_mean) if track_p_mean else None,
        "q_spread": np.asarray(recorder.q_spread) if track_q_spread else None,
        "front_q": np.asarray(recorder.front_q) if track_front else None,
        "top_front_q": np.asarray(recorder.top_front_q) if track_front else None,
        "snapshots": recorder.snapshots,
    }


def _eb_task(kwargs: dict) -> dict:
    return run_eb_trajectory(**kwargs)


def _run_tasks(tasks: list[dict], threads: int) -> list[dict]:
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_eb_task, tasks))
    return [_eb_task(t) for t in tasks]


# ---------------------------------------------------------------------------
# exact-identity suites


def _random_state(grid: Grid, rng) -> SpinorField:
    shape = grid.shape
    psi = SpinorField(
        grid,
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape),
    )
    scale = 1.0 / math.sqrt(psi.norm_sq())
    psi.minus *= scale
    psi.plus *= scale
    return psi


def _gauge_instance(extent: int, steps: int, rng) -> tuple[float, float]:
    """Max trajectory deviation under one random local phase rotation."""
    grid = Grid(extent, extent)
    params = WalkParams(m=1.0)
    a_hist = FieldHistory(grid, [rng.standard_normal((3,) + grid.shape)
                                 for _ in range(steps)])
    phi_hist = FieldHistory(grid, [rng.standard_normal(grid.shape)
                                   for _ in range(steps + 1)])
    psi = _random_state(grid, rng)
    psi_prime, a_prime = gauge_transform(psi, a_hist, phi_hist, params)
    spec = SampledPotential(a_hist, "lower")
    spec_prime = SampledPotential(a_prime, "lower")
    dev = 0.0
    dev_tilde = 0.0
    from .lattice import sigma1
    for j in range(steps):
        nxt, tilde = step(psi, spec.upper_at(grid, j), params,
                          want_intermediate=True, guard=False)
        nxt_p, tilde_p = step(psi_prime, spec_prime.upper_at(grid, j), params,
                              want_intermediate=True, guard=False)
        ph_half = np.exp(-1j * sigma1(phi_hist.slice(j)))
        dev_tilde = max(dev_tilde,
                        float(np.abs(tilde_p.minus - ph_half * tilde.minus).max()),
                        float(np.abs(tilde_p.plus - ph_half * tilde.plus).max()))
        psi, psi_prime = nxt, nxt_p
        ph = np.exp(-1j * phi_hist.slice(j + 1))
        dev = max(dev,
                  float(np.abs(psi_prime.minus - ph * psi.minus).max()),
                  float(np.abs(psi_prime.plus - ph * psi.plus).max()))
    return dev, dev_tilde


def _continuity_instance(extent: int, steps: int, rng) -> float:
    grid = Grid(extent, extent)
    params = WalkParams(m=1.0)
    a_hist = FieldHistory(grid, [rng.standard_normal((3,) + grid.shape)
                                 for _ in range(steps)])
    spec = SampledPotential(a_hist, "lower")
    psi = _random_state(grid, rng)
    worst = 0.0
    for j in range(steps):
        nxt, tilde = step(psi, spec.upper_at(grid, j), params,
                          want_intermediate=True, guard=False)
        cur = current_components(psi, tilde)
        rho_next = np.abs(nxt.minus) ** 2 + np.abs(nxt.plus) ** 2
        res = continuity_residual(cur, rho_next, params.eps_A)
        worst = max(worst, float(np.abs(res).max()))
        psi = nxt
    return worst


def _tensor_gauge_instance(extent: int, rng) -> float:
    grid = Grid(extent, extent)
    params = WalkParams(m=1.0)
    a_hist = FieldHistory(grid, [rng.standard_normal((3,) + grid.shape)
                                 for _ in range(2)])
    phi_hist = FieldHistory(grid, [rng.standard_normal(grid.shape)
                                   for _ in range(3)])
    psi = SpinorField.zeros(grid)
    _, a_prime = gauge_transform(psi, a_hist, phi_hist, params)
    f = field_tensor(a_hist, 0, params.eps_A)
    f_prime = field_tensor(a_prime, 0, params.eps_A)
    return max(float(np.abs(f.f01 - f_prime.f01).max()),
               float(np.abs(f.f02 - f_prime.f02).max()),
               float(np.abs(f.f12 - f_prime.f12).max()))


def _maxwell_identity_instance(extent: int, rng) -> float:
    grid = Grid(extent, extent)
    f_j = FieldTensor(*(rng.standard_normal(grid.shape) for _ in range(3)))
    f_next = FieldTensor(*(rng.standard_normal(grid.shape) for _ in range(3)))
    return maxwell_identity_check(f_j, f_next, 1.0)


def _unitarity_instance(extent: int, steps: int, rng) -> float:
    grid = Grid(extent, extent)
    params = WalkParams(m=1.0)
    a_hist = FieldHistory(grid, [rng.standard_normal((3,) + grid.shape)
                                 for _ in range(steps)])
    spec = SampledPotential(a_hist, "lower")
    psi = _random_state(grid, rng)
    n0 = psi.norm_sq()
    drift = 0.0
    for j in range(steps):
        psi = step(psi, spec.upper_at(grid, j), params, guard=False)
        drift = max(drift, abs(psi.norm_sq() - n0))
    return drift


INVARIANT_THRESHOLDS = {
    "unitarity": 1e-12,
    "gauge_trajectory": 1e-12,
    "gauge_half_step": 1e-12,
    "continuity": 1e-13,
    "field_tensor_gauge": 1e-12,
    "maxwell_identity": 1e-13,
}


def invariant_suite(extent: int = 16, steps: int = 8, gauge_instances: int = 20,
                    gauge_extent: int = 32, gauge_steps: int = 10,
                    tensor_instances: int = 100, shift_instances: int = 20,
                    seed: int = 7) -> list[dict]:
    """Exact-identity checks on random inputs; returns one record per instance."""
    rng = np.random.default_rng(seed)
    records = []

    def add(check, instance, value):
        thr = INVARIANT_THRESHOLDS[check]
        records.append({
            "check": check,
            "instance": instance,
            "value": float(value),
            "threshold": thr,
            "passed": bool(value <= thr),
        })

    for i in range(max(gauge_instances // 4, 2)):
        add("unitarity", i, _unitarity_instance(extent, steps, rng))
    for i in range(gauge_instances):
        dev, dev_tilde = _gauge_instance(gauge_extent, gauge_steps, rng)
        add("gauge_trajectory", i, dev)
        add("gauge_half_step", i, dev_tilde)
    for i in range(max(gauge_instances // 4, 2)):
        add("continuity", i, _continuity_instance(extent, steps, rng))
    for i in range(shift_instances):
        add("field_tensor_gauge", i, _tensor_gauge_instance(extent, rng))
    for i in range(tensor_instances):
        add("maxwell_identity", i, _maxwell_identity_instance(extent, rng))
    return records


def _summarize_invariants(records: list[dict]) -> dict:
    out = {}
    for rec in records:
        entry = out.setdefault(rec["check"], {"max_value": 0.0, "threshold": rec["threshold"],
                                              "instances": 0, "passed": True})
        entry["max_value"] = max(entry["max_value"], rec["value"])
        entry["instances"] += 1
        entry["passed"] = entry["passed"] and rec["passed"]
    return out


def _quick_invariants(seed: int = 7) -> dict:
    records = invariant_suite(extent=12, steps=4, gauge_instances=3, gauge_extent=12,
                              gauge_steps=4, tensor_instances=10, shift_instances=3,
                              seed=seed)
    return _summarize_invariants(records)


# ---------------------------------------------------------------------------
# CSV / metadata output


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _echo(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_echo(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


# ---------------------------------------------------------------------------
# experiment bodies


def _run_convergence(params: dict, out_dir: Path, threads: int):
    levels = []
    for label in params["levels"]:
        if label == "0":
            levels.append(0)
        else:
            levels.append((label[0], int(label[1:])))
    eps_grid = [2.0 ** -int(k) for k in params["eps_exponents"]]
    result = convergence_study(
        levels, params["betas"], eps_grid, m=params["m"], b_field=params["B"],
        order=params["order"], fit_skip=params["fit_skip"],
        refine_check=params["refine_check"],
    )
    rows = [(r["level"], r["beta"], r["eps"], r["delta"]) for r in result.rows]
    csv_path = out_dir / "convergence.csv"
    _write_csv(csv_path, ["level", "beta", "eps", "delta"], rows)
    summary = {
        "slopes": result.slopes,
        "eigenvalue_drift": result.eigenvalue_drift,
    }
    return {"convergence": csv_path}, summary


def _run_bloch(params: dict, out_dir: Path, threads: int):
    steps = params["steps"]
    tasks = [dict(eps_a_E=e, eps_a_B=0.0, steps=steps, extent=params["extent"],
                  track_p_mean=True) for e in params["epsA_E"]]
    results = _run_tasks(tasks, threads)
    rows = []
    periods = []
    for res in results:
        e = res["eps_a_E"]
        for j, v in enumerate(res["p_mean"]):
            rows.append((e, j, v))
        entry = {"epsA_E": e}
        try:
            period, unc = bloch_period(np.arange(res["p_mean"].size), res["p_mean"])
            entry.update(period=period, uncertainty=unc,
                         expected=(2 * _PI / e) if e > 0 else None)
        except NoOscillation as exc:
            entry.update(period=None, note=str(exc))
        periods.append(entry)
    csv_path = out_dir / "bloch.csv"
    _write_csv(csv_path, ["epsA_E", "j", "p_mean"], rows)
    summary = {
        "periods": periods,
        "norm_drift": max(r["norm_drift"] for r in results),
        "continuity_max": max(r["continuity_max"] for r in results),
    }
    return {"bloch": csv_path}, summary


def _run_drift_density(params: dict, out_dir: Path, threads: int):
    steps = params["steps"]
    b = params["epsA_B"]
    tasks = [dict(eps_a_E=e, eps_a_B=b, steps=steps, extent=params["extent"],
                  snapshot_steps=(steps,), density_floor=params["density_floor"])
             for e in params["epsA_E"]]
    results = _run_tasks(tasks, threads)
    rows = []
    pmax_rows = []
    pmax_summary = []
    for res in results:
        e = res["eps_a_E"]
        snap = res["snapshots"][steps]
        dens = snap["density"]
        p0, q0 = snap["p0"], snap["q0"]
        floor = params["density_floor"]
        for i in range(dens.shape[0]):
            for k in range(dens.shape[1]):
                v = dens[i, k]
                if v >= floor:
                    rows.append((e, p0 + i, q0 + k, v))
        pmax_rows.append((e, b, steps, snap["p_max"]))
        pmax_summary.append({"epsA_E": e, "P_max": snap["p_max"]})
    dens_path = out_dir / "drift_density.csv"
    _write_csv(dens_path, ["epsA_E", "p", "q", "P"], rows)
    pmax_path = out_dir / "drift_density_pmax.csv"
    _write_csv(pmax_path, ["epsA_E", "epsA_B", "j", "P_max"], pmax_rows)
    summary = {
        "p_max": pmax_summary,
        "norm_drift": max(r["norm_drift"] for r in results),
        "continuity_max": max(r["continuity_max"] for r in results),
    }
    return {"drift_density": dens_path, "drift_density_pmax": pmax_path}, summary


def _run_drift_speed(params: dict, out_dir: Path, threads: int):
    steps = params["steps"]
    b = params["epsA_B"]
    tasks = [dict(eps_a_E=e, eps_a_B=b, steps=steps, extent=params["extent"],
                  track_front=True, front_prominence=params["front_prominence"])
             for e in params["epsA_E"]]
    results = _run_tasks(tasks, threads)
    rows = []
    speeds = []
    for res in results:
        e = res["eps_a_E"]
        front = res["front_q"]
        js = np.arange(front.size)
        ok = ~np.isnan(front)
        period = 2 * _PI / e if e > 0 else None
        fitted = drift_speed(js[ok], front[ok], transient=params["transient"],
                             period=period)
        for j, v in zip(js, front):
            rows.append((e, b, int(j), v, fitted))
        speeds.append({"epsA_E": e, "fitted_speed": fitted,
                       "expected": e / b if b > 0 else None})
    csv_path = out_dir / "drift_speed.csv"
    _write_csv(csv_path, ["epsA_E", "epsA_B", "j", "q_front", "fitted_speed"], rows)
    summary = {
        "speeds": speeds,
        "norm_drift": max(r["norm_drift"] for r in results),
        "continuity_max": max(r["continuity_max"] for r in results),
    }
    return {"drift_speed": csv_path}, summary


def _run_spread_vs_e(params: dict, out_dir: Path, threads: int):
    snapshots = sorted(params["snapshots"])
    steps = snapshots[-1]
    tasks = []
    for b in params["epsA_B"]:
        for e in params["epsA_E"]:
            tasks.append(dict(eps_a_E=e, eps_a_B=b, steps=steps,
                              extent=params["extent"], track_q_spread=True))
    results = _run_tasks(tasks, threads)
    rows = []
    for res in results:
        for j in snapshots:
            rows.append((res["eps_a_B"], res["eps_a_E"], j, res["q_spread"][j]))
    csv_path = out_dir / "spread_vs_e.csv"
    _write_csv(csv_path, ["epsA_B", "epsA_E", "j", "q_spread"], rows)
    summary = {
        "norm_drift": max(r["norm_drift"] for r in results),
        "continuity_max": max(r["continuity_max"] for r in results),
    }
    return {"spread_vs_e": csv_path}, summary


def _run_localization(params: dict, out_dir: Path, threads: int):
    steps = params["steps"]
    e = params["epsA_E"]
    tasks = [dict(eps_a_E=e, eps_a_B=b, steps=steps, extent=params["extent"],
                  track_q_spread=True) for b in params["epsA_B"]]
    results = _run_tasks(tasks, threads)
    rows = []
    finals = []
    for res in results:
        for j, v in enumerate(res["q_spread"]):
            rows.append((res["eps_a_B"], e, j, v))
        finals.append({"epsA_B": res["eps_a_B"], "final_q_spread": float(res["q_spread"][-1])})
    csv_path = out_dir / "localization.csv"
    _write_csv(csv_path, ["epsA_B", "epsA_E", "j", "q_spread"], rows)
    summary = {
        "final_q_spread": finals,
        "norm_drift": max(r["norm_drift"] for r in results),
        "continuity_max": max(r["continuity_max"] for r in results),
    }
    return {"localization": csv_path}, summary


def _run_invariants(params: dict, out_dir: Path, threads: int):
    records = invariant_suite(**params)
    rows = [(r["check"], r["instance"], r["value"], r["threshold"], r["passed"])
            for r in records]
    csv_path = out_dir / "invariants.csv"
    _write_csv(csv_path, ["check", "instance", "value", "threshold", "passed"], rows)
    summary = _summarize_invariants(records)
    return {"invariants": csv_path}, summary


_RUNNERS = {
    "convergence": _run_convergence,
    "bloch": _run_bloch,
    "drift_density": _run_drift_density,
    "drift_speed": _run_drift_speed,
    "spread_vs_E": _run_spread_vs_e,
    "localization": _run_localization,
    "invariants": _run_invariants,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> RunArtifact:
    """Validate, run the quick identity suite, execute, write CSV + metadata."""
    diags = validate_config(cfg)
    if diags:
        raise ValueError("invalid config: " + "; ".join(diags))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    t_start = time.time()
    quick = _quick_invariants()
    if not all(entry["passed"] for entry in quick.values()):
        raise RuntimeError(f"exact-identity pre-checks failed: {quick}")
    csv_paths, summary = _RUNNERS[cfg.experiment](cfg.params, cfg.out_dir, threads)
    metadata = {
        "experiment": cfg.experiment,
        "params": {k: _echo(v) for k, v in cfg.params.items()},
        "out_dir": str(cfg.out_dir),
        "threads": threads,
        "tool_version": __version__,
        "wall_time_s": time.time() - t_start,
        "invariant_checks": quick,
        "summary": summary,
    }
    metadata_path = cfg.out_dir / "metadata.json"
    with open(metadata_path, "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True, default=_echo)
        fh.write("\n")
    return RunArtifact(csv_paths, metadata_path, metadata)
