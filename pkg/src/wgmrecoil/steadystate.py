"""Steady rotations from torque balance, their stability, the pitchfork
branch and the (Delta, n0) phase diagram."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .model import (
    SystemParams,
    gamma_opt,
    n_threshold,
    omega_star_normal_form,
    recoil_prefactor,
    tau_rec,
)
from .parallel import parallel_map

SCAN_POINTS = 2000
# geometric refinement of the scan next to the origin, where the
# near-threshold roots live
SCAN_GEOM_POINTS = 400
SCAN_GEOM_DEPTH = 1e-10
BISECT_RTOL = 1e-12
MARGINAL_RTOL = 1e-12
NOISE_ULPS = 16


class SteadyRotation(NamedTuple):
    Omega: float
    stable: bool
    marginal: bool = False


@dataclass
class SteadyRotationSet:
    roots: List[SteadyRotation]
    mu: Optional[float]
    params: SystemParams

    @property
    def omegas(self) -> np.ndarray:
        return np.array([r.Omega for r in self.roots])

    @property
    def stable_roots(self) -> List[SteadyRotation]:
        return [r for r in self.roots if r.stable]

    @property
    def omega_star(self) -> float:
        """Largest stable |Omega| (0 if only the rest state is stable)."""
        vals = [abs(r.Omega) for r in self.roots if r.stable]
        return max(vals) if vals else 0.0

    @property
    def rest(self) -> SteadyRotation:
        return next(r for r in self.roots if r.Omega == 0.0)


def torque_balance(Omega, p: SystemParams):
    """g(Omega) = tau_rec(Omega) - Gamma_phi Omega."""
    return tau_rec(Omega, p) - p.Gamma_phi * np.asarray(Omega)


def scan_range(p: SystemParams) -> float:
    return (abs(p.Delta) + 5 * p.gamma) / (2 * p.m)


def scan_grid(p: SystemParams, n_points: int = SCAN_POINTS) -> np.ndarray:
    W = scan_range(p)
    uni = np.linspace(0.0, W, n_points + 1)
    geo = np.geomspace(W * SCAN_GEOM_DEPTH, uni[1], SCAN_GEOM_POINTS)
    return np.unique(np.concatenate([uni, geo]))


def _bisect(f, a: float, b: float, fa: float) -> float:
    while abs(b - a) > BISECT_RTOL * max(abs(a), abs(b)):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _rate_balance(Omega, p: SystemParams):
    """g(Omega)/Omega for Omega > 0: the net anti-damping rate at rotation
    Omega. Free of the trivial root, so its sign is resolvable near 0."""
    g2 = p.gamma**2
    delta = 2 * p.m * np.asarray(Omega, dtype=float)
    lm = g2 + (p.Delta - delta) ** 2
    lp = g2 + (p.Delta + delta) ** 2
    return recoil_prefactor(p) * 8 * p.m * p.Delta / (lm * lp) - p.Gamma_phi


def find_steady_rotations(p: SystemParams, n_points: int = SCAN_POINTS) -> SteadyRotationSet:
    """All uniform rotations balancing recoil torque against friction.

    Scans g(Omega)/Omega on (0, (|Delta| + 5 gamma)/(2m)], bisects each sign
    change, mirrors the positive roots (the torque is odd) and labels
    stability by the sign of g' at each root. Sign changes within rounding
    of zero are not roots.
    """
    grid = scan_grid(p, n_points)[1:]
    h = _rate_balance(grid, p)
    noise = NOISE_ULPS * np.finfo(float).eps * (p.Gamma_phi + abs(gamma_opt(p)))
    h = np.where(np.abs(h) <= noise, 0.0, h)
    f = lambda x: float(_rate_balance(x, p))  # noqa: E731
    nz = np.nonzero(h)[0]
    flip = np.nonzero((h[nz[:-1]] > 0) != (h[nz[1:]] > 0))[0]
    pos = [_bisect(f, grid[nz[k]], grid[nz[k + 1]], h[nz[k]]) for k in flip]

    d = 1e-6 * scan_range(p)
    roots = []
    for x in pos:
        # g' = Omega h' at a root of h
        slope = (f(x + d) - f(max(x - d, 0.5 * x))) / (x + d - max(x - d, 0.5 * x))
        roots.append(SteadyRotation(float(x), bool(slope < 0)))

    slope0 = gamma_opt(p) - p.Gamma_phi
    if abs(slope0) <= MARGINAL_RTOL * max(p.Gamma_phi, abs(gamma_opt(p)), 1e-300):
        rest = SteadyRotation(0.0, True, True)
    else:
        rest = SteadyRotation(0.0, bool(slope0 < 0))

    mirrored = [SteadyRotation(-r.Omega, r.stable, r.marginal) for r in reversed(roots)]
    nth = n_threshold(p)
    mu = None if nth is None else p.n0 / nth
    return SteadyRotationSet(mirrored + [rest] + roots, mu, p)


@dataclass
class BifurcationBranch:
    mu_grid: np.ndarray
    omega_star: np.ndarray
    omega_normal_form: np.ndarray  # NaN below threshold / outside 0 < Delta < gamma

    def __post_init__(self):
        if np.any(np.diff(self.mu_grid) <= 0):
            raise ValueError("mu_grid must be ascending")


def _branch_point(args):
    mu, p = args
    return find_steady_rotations(p.with_mu(mu)).omega_star


def branch(mu_grid: Sequence[float], p: SystemParams, workers: int = 1) -> BifurcationBranch:
    """Largest stable rotation versus pump ratio mu = n0/n_th."""
    if p.Delta <= 0:
        raise ValueError("branch needs Delta > 0 (no threshold to normalize by)")
    if n_threshold(p) is None:
        raise ValueError("branch needs J > 0")
    mu_grid = np.asarray(mu_grid, dtype=float)
    om = np.array(parallel_map(_branch_point, [(mu, p) for mu in mu_grid], workers))
    nf = np.full_like(mu_grid, np.nan)
    if 0 < p.Delta < p.gamma:
        for i, mu in enumerate(mu_grid):
            if mu >= 1:
                nf[i] = omega_star_normal_form(mu, p)
    return BifurcationBranch(mu_grid, om, nf)


@dataclass
class PhaseDiagramGrid:
    delta_grid: np.ndarray
    mu_grid: np.ndarray
    doppler: np.ndarray  # shape (len(mu_grid), len(delta_grid))
    threshold_line: np.ndarray = field(default=None)


def _cell(args):
    d, mu, p = args
    q = p.with_drive(Delta=d).with_mu(mu)
    return 2 * q.m * find_steady_rotations(q).omega_star / q.gamma


def phase_diagram(delta_grid: Sequence[float], mu_grid: Sequence[float], p: SystemParams,
                  workers: int = 1) -> PhaseDiagramGrid:
    """Saturated Doppler shift |2m Omega*|/gamma over (Delta, mu); rows are mu."""
    delta_grid = np.asarray(delta_grid, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)
    if np.any(delta_grid <= 0):
        raise ValueError("phase diagram needs Delta > 0 on every column")
    if p.J <= 0:
        raise ValueError("phase diagram needs J > 0")
    cells = [(d, mu, p) for mu in mu_grid for d in delta_grid]
    vals = np.array(parallel_map(_cell, cells, workers)).reshape(len(mu_grid), len(delta_grid))
    line = np.array([n_threshold(p.with_drive(Delta=d)) for d in delta_grid])
    return PhaseDiagramGrid(delta_grid, mu_grid, vals, line)
