"""Adaptive Dormand-Prince 5(4) integrator compiled with numba.

The right-hand sides are numba-jitted functions ``f(t, y, c, out)`` where
``c`` is a flat float64 coefficient vector. The stepper lands exactly on
every requested output time.
"""

import numpy as np
from numba import njit

# Dormand & Prince (1980) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th order minus embedded 4th order weights
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3


@njit(cache=True)
def _err_norm(y, ynew, err, rtol, atol):
    s = 0.0
    n = y.shape[0]
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        e = err[i] / sc
        s += e * e
    return np.sqrt(s / n)


@njit(cache=True)
def dopri5(rhs, c, t_out, y0, rtol, atol, max_step, max_steps):
    """Integrate from t_out[0] to t_out[-1], sampling at every t_out.

    Returns (samples, n_steps, status, t_last, y_last). On failure the
    samples past the failure point are NaN and ``y_last`` is the last
    accepted state at ``t_last``.
    """
    n = y0.shape[0]
    n_out = t_out.shape[0]
    ys = np.full((n_out, n), np.nan)
    y = y0.copy()
    ys[0, :] = y
    t = t_out[0]

    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)

    rhs(t, y, c, k1)

    # starting step (Hairer, Norsett & Wanner, II.4)
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k1[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    span = t_out[n_out - 1] - t
    h = min(h, max_step, span)
    if h <= 0.0:
        h = min(max_step, span)

    steps = 0
    j = 1
    while j < n_out:
        target = t_out[j]
        tiny = 1e-14 * max(1.0, abs(t))
        if target - t <= tiny:
            # rounding residue: the sample is already reached
            t = target
            ys[j, :] = y
            j += 1
            continue
        last = False
        # stretch by up to 1% rather than leave a sliver before the target
        if t + 1.01 * h >= target:
            h_try = target - t
            last = True
        else:
            h_try = h
        if h_try < tiny:
            return ys, steps, STATUS_UNDERFLOW, t, y

        for i in range(n):
            yt[i] = y[i] + h_try * A21 * k1[i]
        rhs(t + C2 * h_try, yt, c, k2)
        for i in range(n):
            yt[i] = y[i] + h_try * (A31 * k1[i] + A32 * k2[i])
        rhs(t + C3 * h_try, yt, c, k3)
        for i in range(n):
            yt[i] = y[i] + h_try * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(t + C4 * h_try, yt, c, k4)
        for i in range(n):
            yt[i] = y[i] + h_try * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        rhs(t + C5 * h_try, yt, c, k5)
        for i in range(n):
            yt[i] = y[i] + h_try * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        rhs(t + h_try, yt, c, k6)
        for i in range(n):
            ynew[i] = y[i] + h_try * (
                B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
            )
        rhs(t + h_try, ynew, c, k7)
        for i in range(n):
            err[i] = h_try * (
                E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
            )
        en = _err_norm(y, ynew, err, rtol, atol)
        steps += 1
        if steps > max_steps:
            return ys, steps, STATUS_MAX_STEPS, t, y
        if not np.isfinite(en):
            h = 0.2 * h_try
            if h < 1e-14 * max(1.0, abs(t)):
                return ys, steps, STATUS_NONFINITE, t, y
            continue

        if en <= 1.0:
            t = target if last else t + h_try
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            if last:
                ys[j, :] = y
                j += 1
            fac = 10.0 if en == 0.0 else min(10.0, max(0.2, 0.9 * en ** -0.2))
            # a short landing step says nothing about the sustainable step
            if last and h_try < h:
                fac = max(fac, 1.0)
                h = min(max(h, h_try * fac), max_step)
            else:
                h = min(h_try * fac, max_step)
        else:
            h = h_try * max(0.2, 0.9 * en ** -0.2)
    return ys, steps, STATUS_OK, t, y


# --------------------------------------------------------------------------
# right-hand sides
# coefficient vector layout shared by the optical systems:
#   0 m, 1 gamma, 2 J, 3 Delta, 4 S+, 5 S- magnitude, 6 I, 7 Gamma_phi,
#   8 delta_pump, 9 chi, 10 clamped Omega
# --------------------------------------------------------------------------

N_COEF = 11


@njit(cache=True)
def rhs_full(t, y, c, out):
    m = c[0]
    g = c[1]
    J = c[2]
    D = c[3]
    ap_r, ap_i, am_r, am_i = y[0], y[1], y[2], y[3]
    phi, Om = y[4], y[5]
    th = 2.0 * m * phi
    cs, sn = np.cos(th), np.sin(th)
    # S- = |S-| exp(i(chi - delta_pump t))
    ph = c[9] - c[8] * t
    sm_r, sm_i = c[5] * np.cos(ph), c[5] * np.sin(ph)
    # d a+ = (i D - g) a+ - i J e^{-i th} a- + S+
    # e^{-i th} a- = (cs am_r + sn am_i) + i (cs am_i - sn am_r)
    em_r = cs * am_r + sn * am_i
    em_i = cs * am_i - sn * am_r
    out[0] = -g * ap_r - D * ap_i + J * em_i + c[4]
    out[1] = D * ap_r - g * ap_i - J * em_r
    # e^{+i th} a+ = (cs ap_r - sn ap_i) + i (cs ap_i + sn ap_r)
    ep_r = cs * ap_r - sn * ap_i
    ep_i = cs * ap_i + sn * ap_r
    out[2] = -g * am_r - D * am_i + J * ep_i + sm_r
    out[3] = D * am_r - g * am_i - J * ep_r + sm_i
    out[4] = Om
    # Im[e^{i th} a-* a+] = Im[conj(a-) * (e^{i th} a+)]
    coh = am_r * ep_i - am_i * ep_r
    tau = 4.0 * m * J * coh
    out[5] = (tau - c[7] * Om) / c[6]


@njit(cache=True)
def rhs_clamped(t, y, c, out):
    """Optical equations with phi = Omega t imposed; y[4] accumulates the
    torque integral."""
    m = c[0]
    g = c[1]
    J = c[2]
    D = c[3]
    ap_r, ap_i, am_r, am_i = y[0], y[1], y[2], y[3]
    th = 2.0 * m * c[10] * t
    cs, sn = np.cos(th), np.sin(th)
    ph = c[9] - c[8] * t
    sm_r, sm_i = c[5] * np.cos(ph), c[5] * np.sin(ph)
    em_r = cs * am_r + sn * am_i
    em_i = cs * am_i - sn * am_r
    out[0] = -g * ap_r - D * ap_i + J * em_i + c[4]
    out[1] = D * ap_r - g * ap_i - J * em_r
    ep_r = cs * ap_r - sn * ap_i
    ep_i = cs * ap_i + sn * ap_r
    out[2] = -g * am_r - D * am_i + J * ep_i + sm_r
    out[3] = D * am_r - g * am_i - J * ep_r + sm_i
    out[4] = 4.0 * m * J * (am_r * ep_i - am_i * ep_r)


# reduced rotor coefficients: 0 m, 1 gamma, 2 Delta, 3 A_m, 4 I, 5 Gamma_phi
@njit(cache=True)
def rhs_reduced(t, y, c, out):
    m = c[0]
    g2 = c[1] * c[1]
    D = c[2]
    Om = y[1]
    d = 2.0 * m * Om
    tau = c[3] * 4.0 * D * d / ((g2 + (D - d) ** 2) * (g2 + (D + d) ** 2))
    out[0] = Om
    out[1] = (tau - c[5] * Om) / c[4]
