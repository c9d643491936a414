"""Time-domain integration of the mean-field model and the reduced rotor.

Also hosts the brute-force time-averaged-torque oracle that checks the
closed-form reciprocal torque against the full optical equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _rk
from .model import (
    FieldState,
    FixedPhase,
    FrequencyOffset,
    PhaseAveraged,
    SinglePumpSuperposition,
    SystemParams,
    recoil_prefactor,
    tau_rec,
)


class IntegrationError(RuntimeError):
    """Raised when the adaptive stepper cannot continue."""

    def __init__(self, message: str, t_last: float, y_last: np.ndarray):
        super().__init__(f"{message} at t={t_last:.6g}")
        self.t_last = t_last
        self.y_last = y_last


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.01  # in units of 1/gamma
    max_steps: int = 200_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("integrator tolerances must be > 0")
        if not self.max_step > 0:
            raise ValueError("max_step must be > 0")


@dataclass
class Trajectory:
    """Sampled solution. Optical amplitudes are ``None`` for reduced runs."""

    times: np.ndarray
    phi: np.ndarray
    Omega: np.ndarray
    tau: np.ndarray
    I: float
    m: int
    alpha_plus: Optional[np.ndarray] = None
    alpha_minus: Optional[np.ndarray] = None
    n_steps: int = 0

    def __post_init__(self):
        n = len(self.times)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name in ("phi", "Omega", "tau"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"length mismatch in {name}")

    def __len__(self):
        return len(self.times)

    @property
    def n_plus(self):
        return None if self.alpha_plus is None else np.abs(self.alpha_plus) ** 2

    @property
    def n_minus(self):
        return None if self.alpha_minus is None else np.abs(self.alpha_minus) ** 2

    @property
    def N(self):
        return None if self.alpha_plus is None else self.n_plus + self.n_minus

    @property
    def L_opt(self):
        return None if self.alpha_plus is None else self.m * (self.n_plus - self.n_minus)

    @property
    def L_phi(self):
        return self.I * self.Omega

    def state(self, i: int) -> FieldState:
        ap = 0j if self.alpha_plus is None else complex(self.alpha_plus[i])
        am = 0j if self.alpha_minus is None else complex(self.alpha_minus[i])
        return FieldState(ap, am, float(self.phi[i]), float(self.Omega[i]))

    @property
    def final(self) -> FieldState:
        return self.state(len(self) - 1)


@dataclass(frozen=True)
class TorqueOracleResult:
    Omega: float
    tau_avg: float
    tau_analytic: float
    rel_err: float


# --------------------------------------------------------------------------
# coefficient packing
# --------------------------------------------------------------------------


def _coefficients(p: SystemParams, plus_on: bool = True, minus_on: bool = True,
                  chi: Optional[float] = None, Omega_clamp: float = 0.0) -> np.ndarray:
    mode = p.drive.pump_mode
    c = np.zeros(_rk.N_COEF)
    c[0] = p.m
    c[1] = p.gamma
    c[2] = p.J
    c[3] = p.Delta
    c[4] = p.S if plus_on else 0.0
    c[5] = p.S if minus_on else 0.0
    c[6] = p.I
    c[7] = p.Gamma_phi
    c[8] = p.frequency_offset()
    if chi is not None:
        c[9] = chi
    elif isinstance(mode, FixedPhase):
        c[9] = mode.chi
    c[10] = Omega_clamp
    return c


def _reduced_coefficients(p: SystemParams) -> np.ndarray:
    return np.array([p.m, p.gamma, p.Delta, recoil_prefactor(p), p.I, p.Gamma_phi], dtype=float)


def _run(rhs, c, times, y0, cfg: IntegratorConfig):
    ys, steps, status, t_last, y_last = _rk.dopri5(
        rhs, c, np.ascontiguousarray(times, dtype=float), np.ascontiguousarray(y0, dtype=float),
        cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.max_steps,
    )
    if status != _rk.STATUS_OK:
        reason = {
            _rk.STATUS_UNDERFLOW: "step-size underflow",
            _rk.STATUS_MAX_STEPS: "step budget exhausted",
            _rk.STATUS_NONFINITE: "non-finite state",
        }[status]
        raise IntegrationError(reason, t_last, np.array(y_last))
    return ys, steps


def _sample_times(t_end: float, n_samples: int, t0: float = 0.0) -> np.ndarray:
    if not t_end > t0:
        raise ValueError("t_end must be > 0")
    return np.linspace(t0, t_end, max(int(n_samples), 2))


# --------------------------------------------------------------------------
# full mean-field model
# --------------------------------------------------------------------------


def rhs_full(s: FieldState, t: float, p: SystemParams, pumps=(True, True)) -> FieldState:
    """Time derivative of (a+, a-, phi, Omega); returned as a FieldState of
    rates. ``pumps`` switches the two drives on/off individually."""
    c = _coefficients(p, *pumps)
    out = np.empty(6)
    _rk.rhs_full(float(t), s.to_array(), c, out)
    return FieldState.from_array(out)


def _check_full_mode(p: SystemParams):
    if isinstance(p.drive.pump_mode, (PhaseAveraged, SinglePumpSuperposition)):
        raise ValueError(
            f"{p.drive.pump_mode.name} is an averaging prescription for the clamped-rotation "
            "torque oracle; free-rotor runs need FrequencyOffset or FixedPhase pumping"
        )


def integrate_full(s0: FieldState, t_end: float, p: SystemParams,
                   cfg: IntegratorConfig = IntegratorConfig(), n_samples: int = 1001,
                   times: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate the coupled optical + rotor equations from ``s0``."""
    _check_full_mode(p)
    times = _sample_times(t_end, n_samples) if times is None else np.asarray(times, float)
    ys, steps = _run(_rk.rhs_full, _coefficients(p), times, s0.to_array(), cfg)
    ap = ys[:, 0] + 1j * ys[:, 1]
    am = ys[:, 2] + 1j * ys[:, 3]
    phi = ys[:, 4]
    tau = 4 * p.m * p.J * np.imag(np.exp(2j * p.m * phi) * np.conj(am) * ap)
    return Trajectory(times, phi, ys[:, 5], tau, p.I, p.m, ap, am, steps)


def integrate_reduced(Omega0: float, t_end: float, p: SystemParams,
                      cfg: IntegratorConfig = IntegratorConfig(max_step=math.inf),
                      n_samples: int = 1001, phi0: float = 0.0,
                      times: Optional[np.ndarray] = None) -> Trajectory:
    """Integrate I dOmega/dt = tau_rec(Omega) - Gamma_phi Omega.

    The phase phi is carried along as the integral of Omega. The default
    config lifts the step cap: the rotor has no optical time scale.
    """
    times = _sample_times(t_end, n_samples) if times is None else np.asarray(times, float)
    ys, steps = _run(_rk.rhs_reduced, _reduced_coefficients(p), times,
                     np.array([phi0, Omega0], dtype=float), cfg)
    Om = ys[:, 1]
    return Trajectory(times, ys[:, 0], Om, tau_rec(Om, p), p.I, p.m, None, None, steps)


def unperturbed_state(p: SystemParams, plus_on=True, minus_on=True, chi=0.0) -> FieldState:
    """J = 0 steady state of the two driven modes at t = 0."""
    a = p.S / complex(p.gamma, -p.Delta - p.frequency_offset())
    ap = p.S / complex(p.gamma, -p.Delta) if plus_on else 0j
    am = a * np.exp(1j * chi) if minus_on else 0j
    return FieldState(ap, complex(am), 0.0, 0.0)


# --------------------------------------------------------------------------
# torque oracle
# --------------------------------------------------------------------------

TRANSIENT_LIFETIMES = 10.0
MIN_WINDOW_LIFETIMES = 100.0
MIN_DOPPLER_PERIODS = 20
# the torque is bilinear in the two drives, so its chi dependence has only
# e^{+-i chi} harmonics and any equispaced grid of >= 2 points averages the
# cross terms away exactly; the doubling loop confirms it
CHI_GRID_START = 2
CHI_GRID_MAX = 1024


def averaging_window(Omega: float, p: SystemParams):
    """(t_start, t_stop) of the averaging window: transients of 10/gamma are
    discarded, then an integer number of Doppler periods covering at least
    max(20 periods, 100/gamma)."""
    t0 = TRANSIENT_LIFETIMES / p.gamma
    min_len = MIN_WINDOW_LIFETIMES / p.gamma
    doppler = abs(2 * p.m * Omega)
    if doppler == 0:
        return t0, t0 + min_len
    period = 2 * math.pi / doppler
    n_per = max(MIN_DOPPLER_PERIODS, math.ceil(min_len / period))
    return t0, t0 + n_per * period


def _clamped_average(Omega: float, p: SystemParams, cfg: IntegratorConfig,
                     plus_on: bool, minus_on: bool, chi: float) -> float:
    t0, t1 = averaging_window(Omega, p)
    c = _coefficients(p, plus_on, minus_on, chi=chi, Omega_clamp=Omega)
    s0 = unperturbed_state(p, plus_on, minus_on, chi)
    y0 = np.zeros(5)
    y0[:4] = s0.to_array()[:4]
    ys, _ = _run(_rk.rhs_clamped, c, np.array([0.0, t0, t1]), y0, cfg)
    return (ys[2, 4] - ys[1, 4]) / (t1 - t0)


def time_averaged_torque_oracle(Omega: float, p: SystemParams,
                                cfg: IntegratorConfig = IntegratorConfig(),
                                max_time: float = 1e7) -> TorqueOracleResult:
    """Average the instantaneous recoil torque of the optical equations with
    the scatterer clamped to uniform rotation phi = Omega t.

    Pump incoherence follows ``p.drive.pump_mode``: PhaseAveraged averages
    over an adaptive uniform grid of relative phases, SinglePumpSuperposition
    sums the single-pump averages, FixedPhase / FrequencyOffset run as given.
    """
    if not math.isfinite(Omega):
        raise ValueError("Omega must be finite")
    t0, t1 = averaging_window(Omega, p)
    if t1 > max_time:
        raise ValueError(f"averaging window {t1:.3g} exceeds the time budget {max_time:.3g}")

    mode = p.drive.pump_mode
    if isinstance(mode, SinglePumpSuperposition):
        tau = (_clamped_average(Omega, p, cfg, True, False, 0.0)
               + _clamped_average(Omega, p, cfg, False, True, 0.0))
    elif isinstance(mode, PhaseAveraged):
        tau = _phase_averaged(Omega, p, cfg)
    else:
        chi = mode.chi if isinstance(mode, FixedPhase) else 0.0
        tau = _clamped_average(Omega, p, cfg, True, True, chi)

    analytic = tau_rec(Omega, p)
    floor = recoil_prefactor(p) * 1e-9 / p.gamma**2
    rel = abs(tau - analytic) / max(abs(analytic), floor) if floor > 0 else abs(tau - analytic)
    return TorqueOracleResult(Omega, tau, analytic, rel)


def _phase_averaged(Omega: float, p: SystemParams, cfg: IntegratorConfig) -> float:
    n = CHI_GRID_START
    vals = {}

    def mean_over(k):
        chis = 2 * math.pi * np.arange(k) / k
        for x in chis:
            key = round(float(x), 15)
            if key not in vals:
                vals[key] = _clamped_average(Omega, p, cfg, True, True, float(x))
        return float(np.mean([vals[round(float(x), 15)] for x in chis]))

    avg = mean_over(n)
    scale = recoil_prefactor(p) / p.gamma**2
    while n < CHI_GRID_MAX:
        n *= 2
        new = mean_over(n)
        if abs(new - avg) <= 1e-8 * max(abs(new), scale * 1e-3):
            return new
        avg = new
    return avg


def saturated_omega(traj: Trajectory, tail_fraction: float = 0.1) -> float:
    """Mean angular velocity over the final ``tail_fraction`` of a run."""
    k = max(1, int(len(traj) * tail_fraction))
    return float(np.mean(traj.Omega[-k:]))


def growth_sign(p: SystemParams, seed: float, t_end: float,
                cfg: IntegratorConfig = IntegratorConfig(max_step=math.inf, rel_tol=1e-11, abs_tol=1e-300)) -> float:
    """log(|Omega(t_end)| / |seed|) of the reduced rotor: positive when the
    rest state is unstable."""
    tr = integrate_reduced(seed, t_end, p, cfg, n_samples=2)
    return math.log(abs(tr.Omega[-1]) / abs(seed))
