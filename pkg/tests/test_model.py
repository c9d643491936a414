import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wgmrecoil import model as mc
from wgmrecoil.model import FieldState, make_params

# values frozen from 50-digit mpmath evaluation of the same closed forms
TAU_REC_0P02 = 0.18322117146356247
GAMMA_OPT_FIG2 = 10.392304845413264  # 6 sqrt(3)
N_TH_FIG2 = 0.09622504486493763
U_OPT_FIG2 = 3117.6914536239791


def test_n0_examples():
    assert mc.photon_number_n0(make_params(S_mag=0.0)) == 0
    assert mc.photon_number_n0(make_params(Delta=0.0, S_mag=1.0)) == 1
    assert mc.photon_number_n0(make_params(Delta=1 / math.sqrt(3), S_mag=1.0)) == pytest.approx(0.75, rel=1e-15)


def test_n0_round_trips_through_S():
    p = make_params(n0=2.5, Delta=0.3, gamma=1.7)
    assert p.n0 == pytest.approx(2.5, rel=1e-15)


def test_instantaneous_torque_examples():
    p = make_params(m=10, J=0.1)
    assert mc.instantaneous_torque(FieldState(0j, 1 + 0j), p) == 0
    assert mc.instantaneous_torque(FieldState(1 + 0j, 1 + 0j, 0.0), p) == 0
    assert mc.instantaneous_torque(FieldState(1 + 0j, -1j, 0.0), p) == pytest.approx(4.0, rel=1e-15)


@given(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.floats(0, 2 * math.pi),
    st.integers(1, 60),
)
def test_torque_is_minus_energy_gradient(ap, am, phi, m):
    p = make_params(m=m, J=0.07)
    h = 1e-6 / (2 * m)
    e = lambda x: mc.interaction_energy(FieldState(ap, am, x), p)  # noqa: E731
    fd = -(e(phi + h) - e(phi - h)) / (2 * h)
    scale = 4 * m * p.J * abs(ap) * abs(am)
    assert abs(fd - mc.instantaneous_torque(FieldState(ap, am, phi), p)) <= 1e-6 * scale + 1e-300


def test_tau_rec_examples(ref):
    assert mc.tau_rec(0.0, ref) == 0
    assert mc.tau_rec(0.37, ref.with_drive(Delta=0.0)) == 0
    assert mc.recoil_prefactor(ref) == pytest.approx(0.4, rel=1e-15)
    assert mc.tau_rec(0.02, ref) == pytest.approx(TAU_REC_0P02, rel=1e-13)


def test_tau_rec_vectorized(ref):
    x = np.linspace(-0.1, 0.1, 7)
    np.testing.assert_allclose(mc.tau_rec(x, ref), [mc.tau_rec(v, ref) for v in x], rtol=1e-15)


@st.composite
def params(draw):
    gamma = draw(st.floats(0.2, 5))
    return make_params(
        m=draw(st.integers(1, 80)),
        gamma=gamma,
        kappa_ex=gamma,
        J=draw(st.floats(1e-4, 0.5)) * gamma,
        Delta=draw(st.floats(-4, 4).filter(lambda d: abs(d) > 1e-3)) * gamma,
        n0=draw(st.floats(1e-3, 50)),
        Gamma_phi=draw(st.floats(0.01, 100)),
    )


params = params()


@given(params, st.floats(-2, 2))
def test_tau_rec_odd_in_omega_and_delta(p, x):
    Om = x * p.gamma / p.m
    assert mc.tau_rec(-Om, p) == -mc.tau_rec(Om, p)
    assert mc.tau_rec(Om, p.with_drive(Delta=-p.Delta)) == -mc.tau_rec(Om, p)


@given(params, st.floats(-50, 50))
def test_tau_rec_saturates(p, x):
    bound = mc.recoil_prefactor(p) / p.gamma**2
    assert abs(mc.tau_rec(x * p.gamma / p.m, p)) <= bound


def test_gamma_opt_examples(ref):
    assert mc.gamma_opt(ref.with_drive(Delta=0.0)) == 0
    assert mc.gamma_opt(ref) == pytest.approx(GAMMA_OPT_FIG2, rel=1e-13)
    assert mc.gamma_opt(ref.with_optical(m=20)) == pytest.approx(4 * GAMMA_OPT_FIG2, rel=1e-13)


@given(params)
def test_gamma_opt_is_slope_of_tau_rec(p):
    assert mc.slope_fd(p) == pytest.approx(mc.gamma_opt(p), rel=1e-6)


@given(params.filter(lambda p: abs(abs(p.Delta) - p.gamma) > 0.05 * p.gamma))
def test_cubic_coeff_matches_third_derivative(p):
    assert mc.cubic_fd(p) == pytest.approx(mc.cubic_coeff(p), rel=1e-4)


def test_n_threshold_examples(ref):
    assert mc.n_threshold(ref.with_drive(Delta=-0.5)) is None
    assert mc.n_threshold(ref.with_optical(J=0.0)) is None
    assert mc.n_threshold(ref) == pytest.approx(N_TH_FIG2, rel=1e-13)
    assert mc.n_threshold(ref) == pytest.approx(1 / mc.gamma_opt(ref), rel=1e-13)


def test_threshold_scales_as_inverse_m_squared(ref):
    vals = [mc.n_threshold(ref.with_optical(m=m)) * m**2 for m in (1, 2, 5, 10, 50)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-12)
    g = [mc.gamma_opt(ref.with_optical(m=m)) / m**2 for m in (1, 2, 5, 10, 50)]
    np.testing.assert_allclose(g, g[0], rtol=1e-12)


@given(params.filter(lambda p: p.Delta > 0))
def test_gamma_opt_at_threshold_equals_damping(p):
    q = p.with_n0(mc.n_threshold(p))
    assert mc.gamma_opt(q) == pytest.approx(p.Gamma_phi, rel=1e-12)


def test_cubic_coeff_examples(ref):
    assert mc.cubic_coeff(ref.with_drive(Delta=1.0)) == 0
    assert mc.cubic_coeff(ref) == pytest.approx(U_OPT_FIG2, rel=1e-13)
    assert mc.cubic_coeff(ref) == pytest.approx(3 * mc.gamma_opt(ref) * 100, rel=1e-13)
    assert mc.cubic_coeff(ref.with_drive(Delta=1.5)) < 0


@given(params)
def test_normal_form_signs(p):
    nf = mc.normal_form(p)
    assert np.sign(nf.Gamma_opt) == np.sign(p.Delta)
    # u_opt carries the sign of Gamma_opt, hence of Delta
    assert (nf.u_opt > 0) == (p.Delta * (p.gamma**2 - p.Delta**2) > 0)
    if 0 < p.Delta < p.gamma:
        assert nf.u_opt > 0
    assert nf.r == pytest.approx(nf.Gamma_opt - p.Gamma_phi)


def test_omega_star_normal_form(ref):
    assert mc.omega_star_normal_form(1.0, ref) == 0
    assert mc.omega_star_normal_form(1.25, ref) == pytest.approx(0.5 / (math.sqrt(3) * 10), rel=1e-13)
    assert mc.omega_star_normal_form(1.01, ref) == pytest.approx(0.1 / (math.sqrt(3) * 10), rel=1e-13)
    with pytest.raises(ValueError):
        mc.omega_star_normal_form(0.9, ref)
    with pytest.raises(ValueError):
        mc.omega_star_normal_form(1.2, ref.with_drive(Delta=1.2))


def test_optimal_detuning(ref):
    assert mc.optimal_detuning(ref) == pytest.approx(0.5773502691896258, rel=1e-15)
    assert mc.optimal_detuning(ref.with_optical(gamma=2.0, kappa_ex=1.0)) == pytest.approx(1.1547005383792517)


def test_optimal_detuning_grid_scan(ref):
    grid = np.linspace(0, 3, 10_001)[1:]
    nth = [mc.n_threshold(ref.with_drive(Delta=d)) for d in grid]
    assert abs(grid[int(np.argmin(nth))] - 1 / math.sqrt(3)) <= grid[1] - grid[0]
    assert mc.numerical_optimal_detuning(ref) == pytest.approx(1 / math.sqrt(3), abs=1e-6)


@pytest.mark.parametrize("kw", [
    dict(m=0), dict(m=2.5), dict(gamma=-1.0), dict(J=-0.1), dict(kappa_ex=0.0),
    dict(kappa_ex=2.5), dict(I=0.0), dict(Gamma_phi=-1.0), dict(S_mag=-1.0),
])
def test_invalid_params_rejected(kw):
    with pytest.raises(ValueError):
        make_params(**kw)


def test_amplitude_specs_are_exclusive():
    with pytest.raises(ValueError):
        make_params(S_mag=1.0, n0=1.0)


def test_frequency_offset_bounds():
    with pytest.raises(ValueError):
        make_params(pump_mode=mc.FrequencyOffset(1.5))
    p = make_params(pump_mode=mc.FrequencyOffset())
    assert p.frequency_offset() == pytest.approx(0.01)
    assert make_params(I=10.0, pump_mode=mc.FrequencyOffset()).frequency_offset() == pytest.approx(0.1)


def test_observables(ref):
    s = FieldState(2 + 0j, 1j, 0.1, 0.003)
    o = mc.observables(s, ref)
    assert o.N == o.n_plus + o.n_minus == 5
    assert o.L_opt == 10 * (4 - 1)
    assert o.L_phi == pytest.approx(30.0)
