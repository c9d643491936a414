"""Weak-probe optical response of a rotating backscatterer.

A probe launched into one circulation scatters into the opposite one
through a sideband Doppler-shifted by -/+ 2 m Omega*. All formulas are
linear response with the fast sideband adiabatically eliminated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import SystemParams
from .parallel import parallel_map
from .steadystate import find_steady_rotations

ASYMMETRY_FLOOR = 1e-30
DEFAULT_GRID_POINTS = 4001
DEFAULT_GRID_SPAN = 3.0  # in units of gamma


def _sign(direction) -> int:
    if direction in (+1, "+", "plus"):
        return +1
    if direction in (-1, "-", "minus"):
        return -1
    raise ValueError(f"direction must be +1/-1, got {direction!r}")


def default_detuning_grid(p: SystemParams, n: int = DEFAULT_GRID_POINTS,
                          span: float = DEFAULT_GRID_SPAN) -> np.ndarray:
    return np.linspace(-span * p.gamma, span * p.gamma, n)


@dataclass(frozen=True)
class ProbeConfig:
    detuning_grid: np.ndarray
    Omega_star: float = 0.0
    use_weak_approx: bool = False

    def __post_init__(self):
        g = np.asarray(self.detuning_grid, dtype=float)
        if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("detuning_grid must be strictly ascending")
        object.__setattr__(self, "detuning_grid", g)

    @property
    def symmetric(self) -> bool:
        g = self.detuning_grid
        return bool(np.allclose(g, -g[::-1], rtol=0, atol=1e-12 * np.max(np.abs(g))))


@dataclass
class Spectrum:
    detunings: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    T_plus: np.ndarray
    T_minus: np.ndarray
    A_R: np.ndarray  # NaN where R+ + R- falls below the floor
    undefined: np.ndarray  # bool mask of floor points


def backscatter_amplitude(direction, Delta_p, Omega_star: float, p: SystemParams):
    """Amplitude r_+/- scattered into the opposite circulation."""
    s = _sign(direction)
    g, J = p.gamma, p.J
    dp = np.asarray(Delta_p, dtype=float)
    den = (g - 1j * dp) * (g - 1j * (dp - s * 2 * p.m * Omega_star)) + J**2
    return -1j * p.optical.kappa_ex * J / den


def backscatter_weak(direction, Delta_p, Omega_star: float, p: SystemParams):
    """|r_+/-|^2 to leading order in J/gamma: a product of two Lorentzians
    centred at 0 and at +/- 2 m Omega*."""
    s = _sign(direction)
    g2 = p.gamma**2
    dp = np.asarray(Delta_p, dtype=float)
    num = p.optical.kappa_ex**2 * p.J**2
    return num / ((g2 + dp**2) * (g2 + (dp - s * 2 * p.m * Omega_star) ** 2))


def channel_centers(Omega_star: float, p: SystemParams):
    """Centres of the Doppler-shifted Lorentzian factor for the + and -
    probes; they are 4 m Omega* apart."""
    d = 2 * p.m * Omega_star
    return d, -d


def transmission_amplitude(direction, Delta_p, Omega_star: float, p: SystemParams):
    """Same-frequency through amplitude t_+/-."""
    s = _sign(direction)
    g, J = p.gamma, p.J
    dp = np.asarray(Delta_p, dtype=float)
    side = g - 1j * (dp - s * 2 * p.m * Omega_star)
    return 1 - p.optical.kappa_ex / (g - 1j * dp + J**2 / side)


def asymmetry(R_plus, R_minus):
    """(R+ - R-)/(R+ + R-), NaN below the numerical floor."""
    R_plus, R_minus = np.asarray(R_plus), np.asarray(R_minus)
    tot = R_plus + R_minus
    bad = tot < ASYMMETRY_FLOOR
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(bad, np.nan, (R_plus - R_minus) / np.where(bad, 1.0, tot))
    return a, bad


def spectra(cfg: ProbeConfig, p: SystemParams) -> Spectrum:
    dp = cfg.detuning_grid
    W = cfg.Omega_star
    if cfg.use_weak_approx:
        Rp = backscatter_weak(+1, dp, W, p)
        Rm = backscatter_weak(-1, dp, W, p)
    else:
        Rp = np.abs(backscatter_amplitude(+1, dp, W, p)) ** 2
        Rm = np.abs(backscatter_amplitude(-1, dp, W, p)) ** 2
    Tp = np.abs(transmission_amplitude(+1, dp, W, p)) ** 2
    Tm = np.abs(transmission_amplitude(-1, dp, W, p)) ** 2
    A, bad = asymmetry(Rp, Rm)
    return Spectrum(dp, Rp, Rm, Tp, Tm, A, bad)


def peak(x: np.ndarray, y: np.ndarray):
    """Grid argmax refined by a three-point parabola.

    Returns (location, grid spacing) where the spacing is the uncertainty.
    """
    k = int(np.argmax(y))
    dx = float(x[1] - x[0]) if len(x) > 1 else 0.0
    if 0 < k < len(x) - 1:
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            off = 0.5 * (y0 - y2) / den
            h = 0.5 * (x[k + 1] - x[k - 1])
            return float(x[k] + off * h), dx
    return float(x[k]), dx


def max_abs_asymmetry(spec: Spectrum) -> float:
    a = spec.A_R[~spec.undefined]
    return float(np.max(np.abs(a))) if a.size else 0.0


def _asym_point(args):
    mu, p, grid, weak = args
    if mu <= 1:
        return 0.0, 0.0
    W = find_steady_rotations(p.with_mu(mu)).omega_star
    return W, max_abs_asymmetry(spectra(ProbeConfig(grid, W, weak), p))


def max_asymmetry_vs_power(mu_grid: Sequence[float], p: SystemParams,
                           detuning_grid: Optional[np.ndarray] = None,
                           use_weak_approx: bool = False, workers: int = 1):
    """max over the probe grid of |A_R| versus mu, with Omega*(mu) from the
    torque balance. Returns (mu, Omega*, max|A_R|) arrays."""
    if not 0 < p.Delta < p.gamma:
        raise ValueError("asymmetry curve needs 0 < Delta < gamma (supercritical branch)")
    grid = default_detuning_grid(p) if detuning_grid is None else np.asarray(detuning_grid)
    mu_grid = np.asarray(mu_grid, dtype=float)
    res = parallel_map(_asym_point, [(mu, p, grid, use_weak_approx) for mu in mu_grid], workers)
    om = np.array([r[0] for r in res])
    amax = np.array([r[1] for r in res])
    return mu_grid, om, amax
