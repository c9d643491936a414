import math

import hypothesis
import pytest

from wgmrecoil.model import make_params

hypothesis.settings.register_profile("default", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("default")

DELTA_OPT = 1 / math.sqrt(3)


@pytest.fixture
def ref():
    """Reference parameters (gamma = 1, Delta = gamma/sqrt(3), J = 0.1, m = 10,
    Gamma_phi = 1, I = 1e4) at n0 = 1."""
    return make_params(m=10, J=0.1, Delta=DELTA_OPT, Gamma_phi=1.0, I=1e4, n0=1.0)


def omega_star_closed_form(p, mu):
    """Exact nonzero root of Gamma_phi Omega = tau_rec(Omega) at n0 = mu n_th.

    With Gamma_phi = Gamma_opt/mu the balance reduces to
    (g^2 + (D - d)^2)(g^2 + (D + d)^2) = mu (g^2 + D^2)^2, d = 2 m Omega,
    a quadratic in d^2. Independent of the scan-and-bisect root finder.
    """
    g2, D2 = p.gamma**2, p.Delta**2
    disc = (g2 - D2) ** 2 + (g2 + D2) ** 2 * (mu - 1)
    d2 = -(g2 - D2) + math.sqrt(disc)
    return math.sqrt(d2) / (2 * p.m) if d2 > 0 else 0.0


def single_pump_exact_torque(p, Omega):
    """Exact time-averaged torque of the clamped optical equations, summed
    over the two pumps, from the stationary solution in the co-rotating
    sideband frame (valid to all orders in J)."""
    g, D, J, m = p.gamma, p.Delta, p.J, p.m
    d = 2 * m * Omega
    a = complex(g, -D)
    S2 = p.S**2
    b_plus = complex(g, -(D - d))
    b_minus = complex(g, -(D + d))
    t_plus = 4 * m * J**2 * S2 * b_plus.real / abs(a * b_plus + J**2) ** 2
    t_minus = -4 * m * J**2 * S2 * b_minus.real / abs(a * b_minus + J**2) ** 2
    return t_plus + t_minus
