import numpy as np
import pytest
from hypothesis import given, strategies as st

from wgmrecoil.model import make_params
from wgmrecoil.readout import (
    ProbeConfig,
    asymmetry,
    backscatter_amplitude,
    backscatter_weak,
    channel_centers,
    default_detuning_grid,
    max_abs_asymmetry,
    max_asymmetry_vs_power,
    peak,
    spectra,
    transmission_amplitude,
)
from wgmrecoil.steadystate import find_steady_rotations

GRID = np.linspace(-3, 3, 4001)


def test_no_backscatter_without_coupling():
    p = make_params(J=0.0)
    assert np.all(backscatter_amplitude(+1, GRID, 0.01, p) == 0)
    assert np.all(backscatter_weak(-1, GRID, 0.01, p) == 0)


def test_resonance_value_at_rest():
    p = make_params(J=0.1, kappa_ex=1.0)
    r = backscatter_amplitude(+1, 0.0, 0.0, p)
    assert abs(r) ** 2 == pytest.approx(0.01 / (1 + 0.01) ** 2, rel=1e-14)
    assert backscatter_weak(+1, 0.0, 0.0, p) == pytest.approx(0.01, rel=1e-14)


def test_frozen_value_at_split_peak():
    p = make_params(J=0.1, kappa_ex=1.0)
    W = 0.84 / (2 * p.m)
    r = backscatter_amplitude(+1, 0.42, W, p)
    assert abs(r) ** 2 == pytest.approx(0.0071045687947332, rel=1e-12)
    assert backscatter_weak(+1, 0.42, W, p) == pytest.approx(0.01 / 1.1764**2, rel=1e-12)


def test_split_channel_peaks():
    p = make_params(J=0.1, m=10)
    W = 0.84 / (2 * p.m)
    for weak in (True, False):
        s = spectra(ProbeConfig(GRID, W, weak), p)
        xp, dx = peak(GRID, s.R_plus)
        xm, _ = peak(GRID, s.R_minus)
        assert xp == pytest.approx(0.42, abs=dx)
        assert xm == pytest.approx(-0.42, abs=dx)


def test_weak_form_error_is_second_order():
    p = make_params(J=0.01)
    W = 0.84 / (2 * p.m)
    exact = np.abs(backscatter_amplitude(+1, GRID, W, p)) ** 2
    weak = backscatter_weak(+1, GRID, W, p)
    assert np.max(np.abs(exact - weak)) / np.max(weak) <= 1e-3


@given(st.floats(-0.2, 0.2), st.floats(0.01, 0.5), st.integers(1, 40))
def test_mirror_identity(W, J, m):
    p = make_params(J=J, m=m)
    a = np.abs(backscatter_amplitude(+1, GRID, W, p)) ** 2
    b = np.abs(backscatter_amplitude(-1, -GRID, W, p)) ** 2
    np.testing.assert_allclose(a, b, rtol=1e-12)
    s = spectra(ProbeConfig(GRID, W), p)
    np.testing.assert_allclose(s.A_R, -s.A_R[::-1], atol=1e-12)
    assert np.all(np.abs(s.A_R) <= 1)


def test_null_at_rest():
    s = spectra(ProbeConfig(GRID, 0.0), make_params())
    assert np.all(s.A_R == 0)
    assert np.array_equal(s.T_plus, s.T_minus)


def test_rotation_breaks_transmission_reciprocity():
    s = spectra(ProbeConfig(GRID, 0.02), make_params())
    assert np.max(np.abs(s.T_plus - s.T_minus)) > 1e-6


def test_channel_centers():
    p = make_params(m=7)
    cp, cm = channel_centers(0.03, p)
    assert cp - cm == pytest.approx(4 * 7 * 0.03)


@given(st.floats(-0.3, 0.3), st.floats(0.0, 0.5))
def test_passivity(W, J):
    p = make_params(J=J, kappa_ex=1.0, gamma=1.0)
    t = np.abs(transmission_amplitude(+1, GRID, W, p)) ** 2
    assert np.all(t <= 1 + 1e-12)
    assert np.all(backscatter_weak(+1, GRID, W, p) <= J**2 + 1e-15)


def test_asymmetry_floor():
    a, bad = asymmetry(np.array([0.0, 1.0]), np.array([0.0, 0.5]))
    assert bad.tolist() == [True, False]
    assert np.isnan(a[0]) and a[1] == pytest.approx(1 / 3)


def test_probe_config_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        ProbeConfig(np.array([0.0, -1.0]))
    assert ProbeConfig(GRID).symmetric


def test_asymmetry_switches_on_at_threshold():
    p = make_params(J=0.1, n0=1.0)
    mu, om, amax = max_asymmetry_vs_power([0.5, 1.0, 1.0001, 1.5], p, GRID)
    assert amax[0] == 0 and amax[1] == 0
    assert amax[2] > 0
    assert amax[3] > amax[2]
    assert om[3] == find_steady_rotations(p.with_mu(1.5)).omega_star
    spec = spectra(ProbeConfig(GRID, om[3]), p)
    assert amax[3] == max_abs_asymmetry(spec)


def test_asymmetry_curve_needs_supercritical_detuning():
    with pytest.raises(ValueError):
        max_asymmetry_vs_power([1.5], make_params(Delta=1.2, n0=1.0))


def test_default_grid():
    g = default_detuning_grid(make_params(gamma=2.0, kappa_ex=2.0))
    assert g[0] == -6 and g[-1] == 6 and len(g) == 4001
