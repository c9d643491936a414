"""Parameters, state types and closed-form weak-scattering theory.

Units: hbar = 1, rates in units of a reference rate (gamma = 1 by default),
angular momenta in units of hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

# --------------------------------------------------------------------------
# pump modes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseAveraged:
    """Mutually incoherent pumps: observables are averaged over the relative
    pump phase."""

    name = "PhaseAveraged"


@dataclass(frozen=True)
class SinglePumpSuperposition:
    """Each pump is run separately and the (linear) responses are summed."""

    name = "SinglePumpSuperposition"


@dataclass(frozen=True)
class FrequencyOffset:
    """The backward pump is offset by ``delta_pump`` so the standing-wave
    lattice slides. ``None`` selects the default from the mechanical scales."""

    delta_pump: Optional[float] = None
    name = "FrequencyOffset"


@dataclass(frozen=True)
class FixedPhase:
    """Coherent pumps with fixed relative phase ``chi`` (rad)."""

    chi: float = 0.0
    name = "FixedPhase"


PumpMode = Union[PhaseAveraged, SinglePumpSuperposition, FrequencyOffset, FixedPhase]


def parse_pump_mode(name: str, delta_pump: Optional[float] = None, chi: Optional[float] = None) -> PumpMode:
    key = name.strip().lower().replace("_", "").replace("-", "")
    if key == "phaseaveraged":
        return PhaseAveraged()
    if key == "singlepumpsuperposition":
        return SinglePumpSuperposition()
    if key == "frequencyoffset":
        return FrequencyOffset(delta_pump)
    if key == "fixedphase":
        return FixedPhase(0.0 if chi is None else float(chi))
    raise ValueError(f"unknown pump_mode {name!r}")


# --------------------------------------------------------------------------
# parameter records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OpticalParams:
    m: int = 10
    gamma: float = 1.0
    kappa_ex: float = 1.0
    J: float = 0.1

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if self.J < 0:
            raise ValueError(f"J must be >= 0, got {self.J!r}")
        if self.gamma == 0:
            # lossless (conservative) limit: no external port either
            if self.kappa_ex != 0:
                raise ValueError("gamma = 0 (lossless limit) requires kappa_ex = 0")
        elif not 0 < self.kappa_ex <= 2 * self.gamma:
            raise ValueError(f"kappa_ex must satisfy 0 < kappa_ex <= 2*gamma, got {self.kappa_ex!r}")


@dataclass(frozen=True)
class DriveParams:
    Delta: float = 1 / math.sqrt(3)
    S_mag: float = 0.0
    pump_mode: PumpMode = field(default_factory=PhaseAveraged)

    def __post_init__(self):
        if not self.S_mag >= 0:
            raise ValueError(f"S_mag must be >= 0, got {self.S_mag!r}")


@dataclass(frozen=True)
class MechParams:
    I: float = 1e4
    Gamma_phi: float = 1.0

    def __post_init__(self):
        if not self.I > 0:
            raise ValueError(f"I must be > 0, got {self.I!r}")
        # Gamma_phi = 0 only for the conservative limit
        if not self.Gamma_phi >= 0:
            raise ValueError(f"Gamma_phi must be > 0, got {self.Gamma_phi!r}")


@dataclass(frozen=True)
class SystemParams:
    optical: OpticalParams = field(default_factory=OpticalParams)
    drive: DriveParams = field(default_factory=DriveParams)
    mech: MechParams = field(default_factory=MechParams)

    def __post_init__(self):
        mode = self.drive.pump_mode
        if isinstance(mode, FrequencyOffset) and mode.delta_pump is not None:
            if not 0 < mode.delta_pump < self.optical.gamma:
                raise ValueError(
                    f"FrequencyOffset needs 0 < delta_pump < gamma, got {mode.delta_pump!r}"
                )

    # shorthands used throughout the numerics
    @property
    def m(self) -> int:
        return self.optical.m

    @property
    def gamma(self) -> float:
        return self.optical.gamma

    @property
    def J(self) -> float:
        return self.optical.J

    @property
    def Delta(self) -> float:
        return self.drive.Delta

    @property
    def S(self) -> float:
        return self.drive.S_mag

    @property
    def I(self) -> float:
        return self.mech.I

    @property
    def Gamma_phi(self) -> float:
        return self.mech.Gamma_phi

    @property
    def n0(self) -> float:
        return photon_number_n0(self)

    def with_drive(self, **kw) -> "SystemParams":
        return replace(self, drive=replace(self.drive, **kw))

    def with_optical(self, **kw) -> "SystemParams":
        return replace(self, optical=replace(self.optical, **kw))

    def with_mech(self, **kw) -> "SystemParams":
        return replace(self, mech=replace(self.mech, **kw))

    def with_n0(self, n0: float) -> "SystemParams":
        """Same system with |S| chosen so the unperturbed photon number is n0."""
        if n0 < 0:
            raise ValueError("n0 must be >= 0")
        S = math.sqrt(n0 * (self.gamma**2 + self.Delta**2))
        return self.with_drive(S_mag=S)

    def with_mu(self, mu: float) -> "SystemParams":
        """Same system driven at n0 = mu * n_th."""
        nth = n_threshold(self)
        if nth is None:
            raise ValueError("no instability threshold for these parameters (need Delta > 0, J > 0)")
        return self.with_n0(mu * nth)

    def frequency_offset(self) -> float:
        """Resolved backward-pump frequency offset (0 unless FrequencyOffset)."""
        mode = self.drive.pump_mode
        if not isinstance(mode, FrequencyOffset):
            return 0.0
        if mode.delta_pump is not None:
            return float(mode.delta_pump)
        return default_delta_pump(self)


def default_delta_pump(p: SystemParams) -> float:
    """Geometric mean of gamma and the mechanical rate, clamped to
    [10 Gamma_phi/I, gamma/10]."""
    mech_rate = p.Gamma_phi / p.I
    lo, hi = 10 * mech_rate, p.gamma / 10
    val = math.sqrt(p.gamma * mech_rate)
    return min(max(val, lo), hi)


def make_params(
    m: int = 10,
    gamma: float = 1.0,
    kappa_ex: float = 1.0,
    J: float = 0.1,
    Delta: float = 1 / math.sqrt(3),
    S_mag: Optional[float] = None,
    n0: Optional[float] = None,
    mu: Optional[float] = None,
    pump_mode: Optional[PumpMode] = None,
    I: float = 1e4,
    Gamma_phi: float = 1.0,
) -> SystemParams:
    """Flat constructor. At most one of ``S_mag``, ``n0``, ``mu`` may be given."""
    given = [k for k, v in (("S_mag", S_mag), ("n0", n0), ("mu", mu)) if v is not None]
    if len(given) > 1:
        raise ValueError(f"specify at most one of S_mag / n0 / mu, got {given}")
    p = SystemParams(
        OpticalParams(m=m, gamma=gamma, kappa_ex=kappa_ex, J=J),
        DriveParams(Delta=Delta, S_mag=S_mag or 0.0, pump_mode=pump_mode or PhaseAveraged()),
        MechParams(I=I, Gamma_phi=Gamma_phi),
    )
    if n0 is not None:
        p = p.with_n0(n0)
    elif mu is not None:
        p = p.with_mu(mu)
    return p


def conservative_params(m: int = 10, J: float = 0.1, Delta: float = 0.0, I: float = 1e4) -> SystemParams:
    """Lossless, undriven, undamped system (gamma = S = Gamma_phi = 0)."""
    return SystemParams(
        OpticalParams(m=m, gamma=0.0, kappa_ex=0.0, J=J),
        DriveParams(Delta=Delta, S_mag=0.0, pump_mode=FixedPhase(0.0)),
        MechParams(I=I, Gamma_phi=0.0),
    )


# --------------------------------------------------------------------------
# state records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldState:
    alpha_plus: complex = 0j
    alpha_minus: complex = 0j
    phi: float = 0.0
    Omega: float = 0.0

    def to_array(self) -> np.ndarray:
        ap, am = complex(self.alpha_plus), complex(self.alpha_minus)
        return np.array([ap.real, ap.imag, am.real, am.imag, self.phi, self.Omega], dtype=float)

    @classmethod
    def from_array(cls, y) -> "FieldState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), float(y[4]), float(y[5]))


@dataclass(frozen=True)
class DerivedObservables:
    n_plus: float
    n_minus: float
    N: float
    L_opt: float
    tau_inst: float
    L_phi: float


def observables(s: FieldState, p: SystemParams) -> DerivedObservables:
    n_p = abs(s.alpha_plus) ** 2
    n_m = abs(s.alpha_minus) ** 2
    return DerivedObservables(
        n_plus=n_p,
        n_minus=n_m,
        N=n_p + n_m,
        L_opt=p.m * (n_p - n_m),
        tau_inst=instantaneous_torque(s, p),
        L_phi=p.I * s.Omega,
    )


# --------------------------------------------------------------------------
# closed-form theory
# --------------------------------------------------------------------------


def photon_number_n0(p: SystemParams) -> float:
    """Intracavity photons sustained by one unperturbed pump, |S|^2/(gamma^2+Delta^2)."""
    return p.S**2 / (p.gamma**2 + p.Delta**2)


def interaction_energy(s: FieldState, p: SystemParams) -> float:
    """Mean-field backscattering energy J (e^{2im phi} a-* a+ + c.c.)."""
    c = np.exp(2j * p.m * s.phi) * np.conj(s.alpha_minus) * s.alpha_plus
    return float(2 * p.J * c.real)


def instantaneous_torque(s: FieldState, p: SystemParams) -> float:
    """Recoil torque 4 m J Im[e^{2im phi} a-* a+]."""
    c = np.exp(2j * p.m * s.phi) * np.conj(s.alpha_minus) * s.alpha_plus
    return float(4 * p.m * p.J * c.imag)


def recoil_prefactor(p: SystemParams) -> float:
    """A_m = 4 m gamma J^2 n0."""
    return 4 * p.m * p.gamma * p.J**2 * photon_number_n0(p)


def tau_rec(Omega, p: SystemParams):
    """Time-averaged reciprocal-drive torque at uniform rotation Omega.

    Difference of the two Doppler-shifted recoil channels; odd in Omega and in
    Delta. Accepts scalars or arrays.
    """
    g2 = p.gamma**2
    delta = 2 * p.m * np.asarray(Omega, dtype=float)
    A = recoil_prefactor(p)
    # 1/L- - 1/L+ = (L+ - L-)/(L- L+) with L+ - L- = 4 Delta delta, which
    # avoids the cancellation between the two channels at small delta
    lm = g2 + (p.Delta - delta) ** 2
    lp = g2 + (p.Delta + delta) ** 2
    out = A * 4 * p.Delta * delta / (lm * lp)
    return float(out) if np.ndim(out) == 0 else out


def gamma_opt(p: SystemParams) -> float:
    """Optical anti-damping: slope of tau_rec at rest."""
    g2d2 = p.gamma**2 + p.Delta**2
    return 32 * p.m**2 * p.gamma * p.J**2 * photon_number_n0(p) * p.Delta / g2d2**2


def n_threshold(p: SystemParams) -> Optional[float]:
    """Photon number at which anti-damping equals Gamma_phi.

    Returns ``None`` when there is no threshold (Delta <= 0 or J = 0): the
    rest state is then linearly stable at any drive.
    """
    if p.Delta <= 0 or p.J == 0:
        return None
    g2d2 = p.gamma**2 + p.Delta**2
    return p.Gamma_phi * g2d2**2 / (32 * p.m**2 * p.gamma * p.J**2 * p.Delta)


def cubic_coeff(p: SystemParams) -> float:
    """u_opt in tau_rec = Gamma_opt Omega - u_opt Omega^3 + O(Omega^5)."""
    g2, d2 = p.gamma**2, p.Delta**2
    return 8 * gamma_opt(p) * p.m**2 * (g2 - d2) / (g2 + d2) ** 2


def omega_star_normal_form(mu: float, p: SystemParams) -> float:
    """Square-root branch of the cubic normal form, valid near mu = 1."""
    if not 0 < p.Delta < p.gamma:
        raise ValueError(f"supercritical branch needs 0 < Delta < gamma, got Delta={p.Delta!r}")
    if mu < 1:
        raise ValueError(f"branch exists only for mu >= 1, got {mu!r}")
    g2, d2 = p.gamma**2, p.Delta**2
    pref = (g2 + d2) / (2 * p.m * math.sqrt(2 * (g2 - d2)))
    return pref * math.sqrt(mu - 1)


def optimal_detuning(p: SystemParams) -> float:
    """Detuning that minimizes n_th: gamma/sqrt(3)."""
    return p.gamma / math.sqrt(3)


def numerical_optimal_detuning(p: SystemParams, n_grid: int = 10_000, xtol: float = 1e-12) -> float:
    """Brute-force argmin of n_th over Delta in (0, 3 gamma).

    Grid scan followed by golden-section refinement inside the bracketing
    cell pair. Independent of :func:`optimal_detuning`.
    """
    grid = np.linspace(0, 3 * p.gamma, n_grid + 1)[1:]
    vals = np.array([n_threshold(p.with_drive(Delta=d)) for d in grid])
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]

    def f(d):
        return n_threshold(p.with_drive(Delta=d))

    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol * p.gamma:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class NormalFormCoeffs:
    Gamma_opt: float
    u_opt: float
    r: float
    n_th: Optional[float]
    mu: Optional[float]


def normal_form(p: SystemParams) -> NormalFormCoeffs:
    g = gamma_opt(p)
    nth = n_threshold(p)
    return NormalFormCoeffs(
        Gamma_opt=g,
        u_opt=cubic_coeff(p),
        r=g - p.Gamma_phi,
        n_th=nth,
        mu=None if nth is None else photon_number_n0(p) / nth,
    )


def fd_step_first(p: SystemParams) -> float:
    return 1e-6 * p.gamma / (2 * p.m)


def fd_step_third(p: SystemParams) -> float:
    return 1e-3 * p.gamma / (2 * p.m)


def slope_fd(p: SystemParams) -> float:
    """Central finite-difference slope of tau_rec at rest."""
    h = fd_step_first(p)
    return (tau_rec(h, p) - tau_rec(-h, p)) / (2 * h)


def cubic_fd(p: SystemParams) -> float:
    """-(1/6) d^3 tau_rec / dOmega^3 at rest, five-point central difference."""
    h = fd_step_third(p)
    t = lambda x: tau_rec(x, p)  # noqa: E731
    d3 = (t(2 * h) - 2 * t(h) + 2 * t(-h) - t(-2 * h)) / (2 * h**3)
    return -d3 / 6
