"""Compare the saturated rotation of the full field model with the reduced
torque-balance fixed point over a range of pump ratios.

    python scripts/saturation_check.py [--J 0.05] [--mu 1.2 1.5 2.0]
"""

import argparse

from wgmrecoil import model as mc
from wgmrecoil.dynamics import FieldState, IntegratorConfig, integrate_full, saturated_omega, unperturbed_state
from wgmrecoil.steadystate import find_steady_rotations


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--J", type=float, default=0.05)
    ap.add_argument("--mu", type=float, nargs="+", default=[1.2, 1.5, 2.0])
    ap.add_argument("--t-end", type=float, default=3e5)
    args = ap.parse_args()

    cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.5)
    base = mc.make_params(J=args.J, pump_mode=mc.FrequencyOffset(), n0=1.0)
    print(f"{'mu':>6} {'Omega_reduced':>14} {'Omega_full':>14} {'rel_diff':>9}")
    for mu in args.mu:
        p = base.with_mu(mu)
        w = find_steady_rotations(p).omega_star
        s0 = unperturbed_state(p)
        s0 = FieldState(s0.alpha_plus, s0.alpha_minus, 0.0, 0.1 * w)
        tr = integrate_full(s0, args.t_end, p, cfg, n_samples=301)
        wf = saturated_omega(tr, 0.2)
        print(f"{mu:6.3f} {w:14.6e} {wf:14.6e} {wf / w - 1:9.2e}")


if __name__ == "__main__":
    main()
