"""Randomized invariant suite (``wgmrecoil validate``).

Closed-form and root-finding properties run on ``draws`` random parameter
sets; properties that need time integration run on ``dyn_draws`` sets
(both 1000 by default). Two expensive checks run on a fixed small number
of draws: the oracle convergence ratio and the full-model saturation run.
Each property reports the worst violation relative to its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import model as mc
from .dynamics import (
    FieldState,
    IntegratorConfig,
    integrate_full,
    integrate_reduced,
    saturated_omega,
    time_averaged_torque_oracle,
    unperturbed_state,
)
from .readout import (
    backscatter_amplitude,
    backscatter_weak,
    channel_centers,
    ProbeConfig,
    spectra,
)
from .steadystate import find_steady_rotations


@dataclass
class PropertyResult:
    module: str
    name: str
    draws: int
    worst: float  # worst violation / tolerance; <= 1 passes
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= 1.0)


def random_params(rng: np.random.Generator, *, delta_sign=None, delta_range=(0.05, 3.0),
                  J_range=(1e-3, 0.3), m_max=60) -> mc.SystemParams:
    gamma = rng.uniform(0.5, 2.0)
    d = rng.uniform(*delta_range) * gamma
    if delta_sign is None:
        d *= rng.choice([-1.0, 1.0])
    elif delta_sign < 0:
        d = -d
    return mc.make_params(
        m=int(rng.integers(1, m_max + 1)),
        gamma=gamma,
        kappa_ex=rng.uniform(0.05, 2.0) * gamma,
        J=rng.uniform(*J_range) * gamma,
        Delta=d,
        n0=rng.uniform(0.01, 10.0),
        I=10 ** rng.uniform(2, 5),
        Gamma_phi=10 ** rng.uniform(-1, 1),
    )


def _rel(a, b, floor=0.0):
    return abs(a - b) / max(abs(b), floor, 1e-300)


# --------------------------------------------------------------------------
# model-core
# --------------------------------------------------------------------------


def p_oddness(rng):
    p = random_params(rng)
    Om = rng.normal() * p.gamma / p.m
    return float(mc.tau_rec(-Om, p) != -mc.tau_rec(Om, p)) * 2.0


def p_detuning_antisymmetry(rng):
    p = random_params(rng)
    Om = rng.normal() * p.gamma / p.m
    q = p.with_drive(Delta=-p.Delta)
    return float(mc.tau_rec(Om, q) != -mc.tau_rec(Om, p)) * 2.0


def p_slope(rng):
    p = random_params(rng)
    return _rel(mc.slope_fd(p), mc.gamma_opt(p)) / 1e-6


def p_cubic(rng):
    p = random_params(rng)
    # u_opt crosses zero at |Delta| = gamma; relative error is meaningless there
    while abs(abs(p.Delta) - p.gamma) < 0.05 * p.gamma:
        p = random_params(rng)
    return _rel(mc.cubic_fd(p), mc.cubic_coeff(p)) / 1e-4


def p_threshold(rng):
    p = random_params(rng, delta_sign=+1)
    q = p.with_n0(mc.n_threshold(p))
    return _rel(mc.gamma_opt(q), p.Gamma_phi) / 1e-12


def p_scaling(rng):
    p = random_params(rng, delta_sign=+1)
    ms = (1, 2, 5, 10, 50)
    g = [mc.gamma_opt(p.with_optical(m=m)) / m**2 for m in ms]
    n = [mc.n_threshold(p.with_optical(m=m)) * m**2 for m in ms]
    return max(max(_rel(x, g[0]) for x in g), max(_rel(x, n[0]) for x in n)) / 1e-12


def p_torque_gradient(rng):
    p = random_params(rng)
    ap = complex(*rng.normal(size=2))
    am = complex(*rng.normal(size=2))
    phi = rng.uniform(0, 2 * math.pi)
    h = 1e-6 / (2 * p.m)
    e = lambda x: mc.interaction_energy(mc.FieldState(ap, am, x, 0.0), p)  # noqa: E731
    fd = -(e(phi + h) - e(phi - h)) / (2 * h)
    tau = mc.instantaneous_torque(mc.FieldState(ap, am, phi, 0.0), p)
    scale = 4 * p.m * p.J * abs(ap) * abs(am)
    return abs(fd - tau) / (1e-6 * scale)


def p_saturation(rng):
    p = random_params(rng)
    Om = rng.normal() * 10 * p.gamma / p.m
    bound = mc.recoil_prefactor(p) / p.gamma**2
    return abs(mc.tau_rec(Om, p)) / bound


# --------------------------------------------------------------------------
# steadystate
# --------------------------------------------------------------------------


def p_z2_pairing(rng):
    p = random_params(rng, delta_sign=+1).with_mu(rng.uniform(0, 3))
    rs = find_steady_rotations(p).roots
    by = {r.Omega: r for r in rs}
    bad = any((-r.Omega not in by) or by[-r.Omega].stable != r.stable for r in rs)
    return 2.0 if bad else 0.0


def p_exchange(rng):
    """Reversing the detuning reverses the torque: anti-damping becomes
    damping, so only the stable rest state survives."""
    p = random_params(rng, delta_sign=+1).with_mu(rng.uniform(0, 3))
    q = p.with_drive(Delta=-p.Delta)
    Om = rng.normal() * p.gamma / p.m
    if mc.tau_rec(Om, q) != -mc.tau_rec(Om, p):
        return 2.0
    rs = find_steady_rotations(q).roots
    return 0.0 if (len(rs) == 1 and rs[0].Omega == 0.0 and rs[0].stable) else 2.0


def p_pitchfork(rng):
    p = random_params(rng, delta_sign=+1, delta_range=(0.05, 0.95))
    out = 0.0
    for mu, n_stable, rest_stable in ((1 - 1e-4, 1, True), (1 + 1e-4, 2, False),
                                      (rng.uniform(0.0, 0.999), 1, True),
                                      (rng.uniform(1.001, 3.0), 2, False)):
        s = find_steady_rotations(p.with_mu(mu))
        if len(s.stable_roots) != n_stable or s.rest.stable != rest_stable:
            out = 2.0
    return out


def p_near_threshold(rng):
    p = random_params(rng, delta_sign=+1)
    p = p.with_drive(Delta=p.gamma / math.sqrt(3))
    eps = 10 ** rng.uniform(-4, -2)
    w = find_steady_rotations(p.with_mu(1 + eps)).omega_star
    return abs(w / mc.omega_star_normal_form(1 + eps, p) - 1) / 0.01


def p_relaxation(rng):
    p = random_params(rng, delta_sign=+1).with_mu(rng.uniform(0.0, 0.9))
    rate = (p.Gamma_phi - mc.gamma_opt(p)) / p.I
    unit = p.gamma / (2 * p.m)
    t_end = 5.0 / rate
    tr = integrate_reduced(1e-6 * unit, t_end, p,
                           IntegratorConfig(rel_tol=1e-11, abs_tol=1e-300, max_step=math.inf),
                           n_samples=51)
    slope = -np.polyfit(tr.times, np.log(tr.Omega), 1)[0]
    return _rel(slope, rate) / 0.01


# --------------------------------------------------------------------------
# readout
# --------------------------------------------------------------------------


def _probe_case(rng):
    p = random_params(rng)
    W = rng.normal() * p.gamma / p.m
    grid = np.linspace(-3, 3, 241) * p.gamma
    return p, W, grid


def p_mirror(rng):
    p, W, x = _probe_case(rng)
    worst = 0.0
    a = np.abs(backscatter_amplitude(+1, x, W, p)) ** 2
    b = np.abs(backscatter_amplitude(-1, -x, W, p)) ** 2
    worst = max(worst, float(np.max(np.abs(a - b) / b)))
    a = backscatter_weak(+1, x, W, p)
    b = backscatter_weak(-1, -x, W, p)
    worst = max(worst, float(np.max(np.abs(a - b) / b)))
    return worst / 1e-12


def p_asym_odd(rng):
    p, W, x = _probe_case(rng)
    worst = 0.0
    for weak in (False, True):
        s = spectra(ProbeConfig(x, W, weak), p)
        ok = ~(s.undefined | s.undefined[::-1])
        worst = max(worst, float(np.max(np.abs(s.A_R[ok] + s.A_R[::-1][ok]), initial=0.0)))
        if np.any(np.abs(s.A_R[ok]) > 1 + 1e-15) or np.any(s.R_plus < 0) or np.any(s.T_plus < 0):
            return 2.0
    return worst / 1e-12


def p_null_at_rest(rng):
    p, _, x = _probe_case(rng)
    s = spectra(ProbeConfig(x, 0.0), p)
    d = max(float(np.max(np.abs(s.A_R))), float(np.max(np.abs(s.T_plus - s.T_minus))))
    return d / 1e-15 if d > 0 else 0.0


def p_direction(rng):
    p, W, x = _probe_case(rng)
    if W == 0:
        return 0.0
    s = spectra(ProbeConfig(x, W), p)
    return 0.0 if np.any(s.T_plus != s.T_minus) else 2.0


def p_channel_centers(rng):
    p, W, _ = _probe_case(rng)
    cp, cm = channel_centers(W, p)
    return _rel(cp - cm, 4 * p.m * W) / 1e-14


def p_passivity(rng):
    p, W, x = _probe_case(rng)
    s = spectra(ProbeConfig(x, W, True), p)
    tmax = max(float(np.max(s.T_plus)), float(np.max(s.T_minus)))
    rbound = p.optical.kappa_ex**2 * p.J**2 / p.gamma**4
    rmax = max(float(np.max(s.R_plus)), float(np.max(s.R_minus)))
    g, dp = p.gamma, x
    den = np.abs((g - 1j * dp) * (g - 1j * (dp - 2 * p.m * W)) + p.J**2)
    v = max(tmax - 1.0, rmax / rbound - 1.0, float(np.max(g**2 - den)))
    return max(0.0, v / 1e-12)


# --------------------------------------------------------------------------
# dynamics (time integration)
# --------------------------------------------------------------------------


def _dyn_params(rng, **kw):
    return random_params(rng, m_max=20, J_range=(0.002, 0.02), **kw).with_optical(gamma=1.0, kappa_ex=1.0)


def p_linearity(rng):
    p = _dyn_params(rng)
    Om = rng.uniform(0.3, 3.0) / (2 * p.m) * rng.choice([-1, 1])
    a = time_averaged_torque_oracle(Om, p.with_drive(pump_mode=mc.PhaseAveraged())).tau_avg
    b = time_averaged_torque_oracle(Om, p.with_drive(pump_mode=mc.SinglePumpSuperposition())).tau_avg
    floor = mc.recoil_prefactor(p) * 1e-6 / p.gamma**2
    return _rel(a, b, floor) / 1e-6


def p_oracle_convergence(rng):
    p = _dyn_params(rng, delta_sign=+1).with_optical(J=0.01)
    p = p.with_drive(pump_mode=mc.SinglePumpSuperposition())
    oms = np.linspace(0.2, 3.0, 5) / (2 * p.m)
    e1 = max(time_averaged_torque_oracle(w, p).rel_err for w in oms)
    q = p.with_optical(J=0.005)
    e2 = max(time_averaged_torque_oracle(w, q).rel_err for w in oms)
    ratio = e1 / e2
    # map [3, 5] onto <= 1
    return abs(ratio - 4.0)


def p_conservation(rng):
    p = mc.conservative_params(m=int(rng.integers(1, 20)), J=rng.uniform(0.01, 0.5),
                               Delta=rng.uniform(-1, 1), I=10 ** rng.uniform(1, 4))
    s0 = FieldState(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)),
                    rng.uniform(0, 2 * math.pi), rng.uniform(-1, 1) / (2 * p.m))
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, max_step=0.5)
    tr = integrate_full(s0, 50 * 2 * math.pi, p, cfg, n_samples=51)
    L = tr.L_phi + tr.L_opt
    scale = abs(p.I * s0.Omega) + p.m * (abs(s0.alpha_plus) ** 2 + abs(s0.alpha_minus) ** 2)
    return float(np.max(np.abs(L - L[0]))) / (1e-8 * scale)


def p_equivariance(rng):
    p = _dyn_params(rng).with_mech(I=10 ** rng.uniform(1, 3))
    chi = rng.uniform(0, 2 * math.pi)
    p = p.with_drive(pump_mode=mc.FixedPhase(chi))
    s0 = FieldState(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)),
                    rng.uniform(0, 2 * math.pi), rng.normal() * 0.1 / (2 * p.m))
    rot = np.exp(-1j * chi)
    s1 = FieldState(s0.alpha_minus * rot, s0.alpha_plus * rot, -s0.phi, -s0.Omega)
    q = p.with_drive(pump_mode=mc.FixedPhase(-chi))
    cfg = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13, max_step=0.1)
    a = integrate_full(s0, 100.0, p, cfg, n_samples=51)
    b = integrate_full(s1, 100.0, q, cfg, n_samples=51)
    ref = integrate_full(s0, 100.0, p, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, max_step=0.1),
                         n_samples=51)
    amp = max(1.0, float(np.max(np.abs(a.alpha_plus))), float(np.max(np.abs(a.alpha_minus))))
    phi_s = max(1.0, float(np.max(np.abs(a.phi))))
    om_s = max(1e-3 / p.m, float(np.max(np.abs(a.Omega))))

    def dist(x1, x2, x3, x4):
        return max(float(np.max(np.abs(x1))) / amp, float(np.max(np.abs(x2))) / amp,
                   float(np.max(np.abs(x3))) / phi_s, float(np.max(np.abs(x4))) / om_s)

    d = dist(a.alpha_plus * rot - b.alpha_minus, a.alpha_minus * rot - b.alpha_plus,
             a.phi + b.phi, a.Omega + b.Omega)
    # "integrator tolerance": the measured global error of the run itself
    err = dist(a.alpha_plus - ref.alpha_plus, a.alpha_minus - ref.alpha_minus,
               a.phi - ref.phi, a.Omega - ref.Omega)
    return d / max(1e-9, 10 * err)


def p_reduced_full(rng):
    """Reference parameters at J = 0.05, mu = 1.5; the seed sign is random."""
    p = mc.make_params(J=0.05, pump_mode=mc.FrequencyOffset()).with_mu(1.5)
    w_red = find_steady_rotations(p).omega_star
    s0 = unperturbed_state(p)
    s0 = FieldState(s0.alpha_plus, s0.alpha_minus, 0.0, rng.choice([-1, 1]) * 0.1 * w_red)
    tr = integrate_full(s0, 3e5, p, IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.5),
                        n_samples=301)
    return _rel(abs(saturated_omega(tr, 0.2)), w_red) / 0.05


@dataclass
class Property:
    module: str
    name: str
    check: Callable
    dynamic: bool = False
    fixed_draws: int = 0  # >0 overrides the draw count


PROPERTIES: List[Property] = [
    Property("model-core", "tau_rec odd in Omega", p_oddness),
    Property("model-core", "tau_rec odd in Delta", p_detuning_antisymmetry),
    Property("model-core", "slope FD == Gamma_opt (1e-6)", p_slope),
    Property("model-core", "cubic FD == u_opt (1e-4)", p_cubic),
    Property("model-core", "Gamma_opt(n_th) == Gamma_phi (1e-12)", p_threshold),
    Property("model-core", "Gamma_opt ~ m^2, n_th ~ m^-2 (1e-12)", p_scaling),
    Property("model-core", "torque == -d/dphi interaction energy (1e-6)", p_torque_gradient),
    Property("model-core", "|tau_rec| <= A_m/gamma^2", p_saturation),
    Property("steadystate", "Z2 root pairing", p_z2_pairing),
    Property("steadystate", "Delta -> -Delta: only stable rest", p_exchange),
    Property("steadystate", "pitchfork criticality at mu = 1 (+-1e-4)", p_pitchfork),
    Property("steadystate", "near-threshold law (1%)", p_near_threshold),
    Property("steadystate", "sub-threshold decay rate (1%)", p_relaxation, dynamic=True),
    Property("readout", "R+(x) == R-(-x) (1e-12)", p_mirror),
    Property("readout", "A_R odd, in [-1, 1]; R, T >= 0", p_asym_odd),
    Property("readout", "null response at rest", p_null_at_rest),
    Property("readout", "T+ != T- when rotating", p_direction),
    Property("readout", "channel centres split by 4 m Omega*", p_channel_centers),
    Property("readout", "passivity and denominator bound", p_passivity),
    Property("dynamics", "phase-averaged == single-pump sum (1e-6)", p_linearity, dynamic=True),
    Property("dynamics", "oracle error ratio in [3, 5] when J halves", p_oracle_convergence,
             dynamic=True, fixed_draws=10),
    Property("dynamics", "conservative angular momentum (1e-8)", p_conservation, dynamic=True),
    Property("dynamics", "Z2 equivariance to integrator error", p_equivariance, dynamic=True),
    Property("dynamics", "reduced vs full saturation (5%)", p_reduced_full, dynamic=True,
             fixed_draws=3),
]


def run_validation(draws: int = 1000, dyn_draws: int = 1000, seed: int = 0,
                   include_slow: bool = True, log=None) -> List[PropertyResult]:
    """Evaluate every property; each gets its own reproducible RNG stream."""
    out = []
    for k, prop in enumerate(PROPERTIES):
        if prop.fixed_draws:
            n = prop.fixed_draws
            if not include_slow and prop.name.startswith("reduced vs full"):
                continue
        else:
            n = dyn_draws if prop.dynamic else draws
        rng = np.random.default_rng([seed, k])
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(n):
            worst = max(worst, float(prop.check(rng)))
        res = PropertyResult(prop.module, prop.name, n, worst, time.perf_counter() - t0)
        if log:
            log(res)
        out.append(res)
    return out
