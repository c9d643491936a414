"""One runner per experiment, plus CSV / manifest / SVG emission.

Every runner returns a list of tables ``(filename, columns, rows)``; rows
are tuples of floats. Files are written only after all computation is done.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import __version__
from .config import Experiment, RunConfig
from .dynamics import (
    FieldState,
    integrate_full,
    integrate_reduced,
    time_averaged_torque_oracle,
    unperturbed_state,
)
from .model import (
    SinglePumpSuperposition,
    SystemParams,
    gamma_opt,
    n_threshold,
    numerical_optimal_detuning,
    optimal_detuning,
    tau_rec,
)
from .readout import ProbeConfig, max_asymmetry_vs_power, spectra
from .steadystate import branch, find_steady_rotations, phase_diagram

UNIT_LINE = "# hbar=1; rates in units of the reference rate (gamma=1 by default); " \
            "torque_norm = tau/(Gamma_phi*gamma/(2m)); doppler = 2m*Omega/gamma; mu = n0/n_th"

Table = Tuple[str, List[str], List[Tuple]]


def fmt(x) -> str:
    """Shortest round-trip decimal form."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def csv_text(columns: Sequence[str], rows: Sequence[Tuple]) -> str:
    lines = [UNIT_LINE, ",".join(columns)]
    lines += [",".join(fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _torque_norm(p: SystemParams) -> float:
    return p.Gamma_phi * p.gamma / (2 * p.m)


# --------------------------------------------------------------------------
# runners
# --------------------------------------------------------------------------


def run_torque_curve(cfg: RunConfig) -> List[Table]:
    p0, g = cfg.params, cfg.grids
    x = np.linspace(-g["doppler_max"], g["doppler_max"], g["points"])
    rows, roots = [], []
    for mu in g["mu_values"]:
        p = p0.with_mu(mu)
        Om = x * p.gamma / (2 * p.m)
        tau = tau_rec(Om, p)
        norm = _torque_norm(p)
        for xi, oi, ti in zip(x, Om, tau):
            rows.append((mu, xi, oi, ti, ti / norm, p.Gamma_phi * oi / norm))
        for r in find_steady_rotations(p).roots:
            roots.append((mu, 2 * p.m * r.Omega / p.gamma, r.Omega, tau_rec(r.Omega, p), r.stable))
    cols = ["mu", "doppler", "Omega[gamma]", "tau_rec[hbar*gamma]", "tau_norm", "damping_norm"]
    rcols = ["mu", "doppler", "Omega[gamma]", "tau_rec[hbar*gamma]", "stable"]
    return [("torque-curve.csv", cols, rows), ("torque-curve-roots.csv", rcols, roots)]


def run_bifurcation(cfg: RunConfig) -> List[Table]:
    p, g = cfg.params, cfg.grids
    mu = np.linspace(g["mu_min"], g["mu_max"], g["mu_points"])
    br = branch(mu, p, cfg.workers)
    k = 2 * p.m / p.gamma
    rows = [(m_, w, k * w, wn, k * wn) for m_, w, wn in zip(br.mu_grid, br.omega_star, br.omega_normal_form)]
    cols = ["mu", "Omega_star[gamma]", "doppler_star", "Omega_normal_form[gamma]", "doppler_normal_form"]
    return [("bifurcation.csv", cols, rows)]


def run_time_evolution(cfg: RunConfig) -> List[Table]:
    p0, g = cfg.params, cfg.grids
    rows = []
    for mu in g["mu_values"]:
        p = p0.with_mu(mu)
        unit = p.gamma / (2 * p.m)
        for sgn in (+1, -1):
            seed = sgn * g["seed"] * unit
            if g["model"] == "reduced":
                tr = integrate_reduced(seed, g["t_end"], p, n_samples=g["samples"])
            else:
                s0 = unperturbed_state(p)
                s0 = FieldState(s0.alpha_plus, s0.alpha_minus, 0.0, seed)
                tr = integrate_full(s0, g["t_end"], p, cfg.integrator, n_samples=g["samples"])
            for t, w in zip(tr.times, tr.Omega):
                rows.append((mu, seed, t, w, w / unit))
    cols = ["mu", "seed[gamma]", "t[1/gamma]", "Omega[gamma]", "doppler"]
    return [("time-evolution.csv", cols, rows)]


def run_phase_diagram(cfg: RunConfig) -> List[Table]:
    p, g = cfg.params, cfg.grids
    d = np.linspace(g["delta_min"], g["delta_max"], g["delta_points"])
    mu = np.linspace(g["mu_min"], g["mu_max"], g["mu_points"])
    pd = phase_diagram(d, mu, p, cfg.workers)
    rows = []
    for i, mu_i in enumerate(pd.mu_grid):
        for j, d_j in enumerate(pd.delta_grid):
            nth = pd.threshold_line[j]
            rows.append((d_j, mu_i, mu_i * nth, nth, pd.doppler[i, j]))
    cols = ["Delta[gamma]", "mu", "n0", "n_th", "doppler_star"]
    return [("phase-diagram.csv", cols, rows)]


def _detuning_grid(p, g):
    return np.linspace(-g["detuning_span"] * p.gamma, g["detuning_span"] * p.gamma, g["detuning_points"])


def run_spectra(cfg: RunConfig) -> List[Table]:
    p, g = cfg.params, cfg.grids
    if g["mu_star"] is not None:
        W = find_steady_rotations(p.with_mu(g["mu_star"])).omega_star
    else:
        W = g["doppler_star"] * p.gamma / (2 * p.m)
    sp = spectra(ProbeConfig(_detuning_grid(p, g), W, bool(g["use_weak_approx"])), p)
    rows = list(zip(sp.detunings, sp.R_plus, sp.R_minus, sp.T_plus, sp.T_minus, sp.A_R))
    cols = ["Delta_p[gamma]", "R_plus", "R_minus", "T_plus", "T_minus", "A_R"]
    return [("spectra.csv", cols, rows)]


def run_asymmetry(cfg: RunConfig) -> List[Table]:
    p, g = cfg.params, cfg.grids
    grid = _detuning_grid(p, g)
    weak = bool(g["use_weak_approx"])
    mu = np.linspace(g["mu_min"], g["mu_max"], g["mu_points"])
    mu, om, amax = max_asymmetry_vs_power(mu, p, grid, weak, cfg.workers)
    k = 2 * p.m / p.gamma
    rows = [(a, w, k * w, b) for a, w, b in zip(mu, om, amax)]
    prof = []
    for mu_p in g["profile_mu"]:
        W = find_steady_rotations(p.with_mu(mu_p)).omega_star if mu_p > 1 else 0.0
        sp = spectra(ProbeConfig(grid, W, weak), p)
        prof += [(mu_p, k * W, x, a) for x, a in zip(sp.detunings, sp.A_R)]
    return [
        ("asymmetry.csv", ["mu", "Omega_star[gamma]", "doppler_star", "max_abs_A_R"], rows),
        ("asymmetry-profile.csv", ["mu", "doppler_star", "Delta_p[gamma]", "A_R"], prof),
    ]


def run_threshold(cfg: RunConfig) -> List[Table]:
    p, g = cfg.params, cfg.grids
    d_opt = optimal_detuning(p)
    d_num = numerical_optimal_detuning(p)
    rows = []
    for m in g["m_values"]:
        q = p.with_optical(m=int(m))
        nth = n_threshold(q)
        nth_opt = n_threshold(q.with_drive(Delta=d_opt))
        per_photon = gamma_opt(q.with_n0(1.0))
        rows.append((int(m), q.Delta, math.nan if nth is None else nth,
                     math.nan if nth is None else nth * m**2, d_opt, d_num, nth_opt, per_photon))
    cols = ["m", "Delta[gamma]", "n_th", "n_th_times_m2", "Delta_opt[gamma]",
            "Delta_opt_numerical[gamma]", "n_th_at_Delta_opt", "Gamma_opt_per_photon"]
    return [("threshold.csv", cols, rows)]


def run_oracle_check(cfg: RunConfig) -> List[Table]:
    p0, g = cfg.params, cfg.grids
    x = np.linspace(g["doppler_min"], g["doppler_max"], g["points"])
    rows = []
    for J in g["J_values"]:
        p = p0.with_optical(J=J).with_n0(g["n0_oracle"])
        for xi in x:
            Om = xi * p.gamma / (2 * p.m)
            r = time_averaged_torque_oracle(Om, p, cfg.integrator)
            rows.append((J, xi, Om, r.tau_avg, r.tau_analytic, r.rel_err))
    cols = ["J[gamma]", "doppler", "Omega[gamma]", "tau_avg", "tau_analytic", "rel_err"]
    return [("oracle-check.csv", cols, rows)]


RUNNERS: Dict[Experiment, Callable[[RunConfig], List[Table]]] = {
    Experiment.TorqueCurve: run_torque_curve,
    Experiment.Bifurcation: run_bifurcation,
    Experiment.TimeEvolution: run_time_evolution,
    Experiment.PhaseDiagram: run_phase_diagram,
    Experiment.Spectra: run_spectra,
    Experiment.Asymmetry: run_asymmetry,
    Experiment.Threshold: run_threshold,
    Experiment.OracleCheck: run_oracle_check,
}


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_clock_s: float
    started: str
    outputs: Dict[str, str]  # filename -> sha256

    def to_json(self) -> str:
        return json.dumps({
            "tool": "wgmrecoil",
            "version": self.version,
            "started": self.started,
            "wall_clock_s": self.wall_clock_s,
            "config": self.config,
            "outputs": self.outputs,
        }, indent=2, sort_keys=True)


def run(cfg: RunConfig, out_dir=None) -> RunManifest:
    """Execute the configured experiment and write CSV, manifest and SVG."""
    out = Path(out_dir or cfg.out_dir)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    t0 = time.perf_counter()
    tables = RUNNERS[cfg.experiment](cfg)
    elapsed = time.perf_counter() - t0

    out.mkdir(parents=True, exist_ok=True)
    sums = {}
    for name, cols, rows in tables:
        data = csv_text(cols, rows).encode()
        (out / name).write_bytes(data)
        sums[name] = hashlib.sha256(data).hexdigest()
    resolved = cfg.resolved()
    resolved["output"]["out_dir"] = str(out)
    man = RunManifest(resolved, __version__, elapsed, started, sums)
    (out / "manifest.json").write_text(man.to_json() + "\n")
    if cfg.emit_svg:
        from .plots import render

        render(cfg.experiment, tables, out)
    return man
