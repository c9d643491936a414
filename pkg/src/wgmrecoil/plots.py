"""SVG rendering of experiment tables. Convenience only; never used for
verification."""

from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("svg")
import matplotlib.pyplot as plt  # noqa: E402

from .config import Experiment  # noqa: E402


def _cols(table):
    _, cols, rows = table
    arr = np.array(rows, dtype=float) if rows else np.zeros((0, len(cols)))
    return {c: arr[:, i] for i, c in enumerate(cols)}


def render(exp: Experiment, tables, out: Path):
    plt.rcParams["svg.hashsalt"] = "wgmrecoil"
    fig, ax = plt.subplots(figsize=(5, 3.6))
    d = _cols(tables[0])
    if exp is Experiment.TorqueCurve:
        for mu in np.unique(d["mu"]):
            k = d["mu"] == mu
            ax.plot(d["doppler"][k], d["tau_norm"][k], label=f"mu={mu:g}")
        k = d["mu"] == d["mu"][0]
        ax.plot(d["doppler"][k], d["damping_norm"][k], "k--", label="Gamma_phi Omega")
        ax.set_xlabel("2m Omega / gamma")
        ax.set_ylabel("torque / (Gamma_phi gamma / 2m)")
        ax.legend()
    elif exp is Experiment.Bifurcation:
        ax.plot(d["mu"], d["doppler_star"], "C0", label="torque balance")
        ax.plot(d["mu"], -d["doppler_star"], "C0")
        ax.plot(d["mu"], d["doppler_normal_form"], "k:", label="normal form")
        ax.set_xlabel("n0 / n_th")
        ax.set_ylabel("2m Omega* / gamma")
        ax.legend()
    elif exp is Experiment.TimeEvolution:
        for mu in np.unique(d["mu"]):
            for s in np.unique(d["seed[gamma]"]):
                k = (d["mu"] == mu) & (d["seed[gamma]"] == s)
                ax.plot(d["t[1/gamma]"][k], d["doppler"][k], label=f"mu={mu:g}")
        ax.set_xlabel("t gamma")
        ax.set_ylabel("2m Omega / gamma")
    elif exp is Experiment.PhaseDiagram:
        D = np.unique(d["Delta[gamma]"])
        M = np.unique(d["mu"])
        Z = d["doppler_star"].reshape(len(M), len(D))
        im = ax.pcolormesh(D, M, Z, shading="auto")
        ax.axhline(1.0, color="w")
        fig.colorbar(im, label="|2m Omega*| / gamma")
        ax.set_xlabel("Delta / gamma")
        ax.set_ylabel("n0 / n_th")
    elif exp is Experiment.Spectra:
        ax.plot(d["Delta_p[gamma]"], d["R_plus"] / d["R_plus"].max(), label="R+")
        ax.plot(d["Delta_p[gamma]"], d["R_minus"] / d["R_minus"].max(), label="R-")
        ax.set_xlabel("Delta_p / gamma")
        ax.legend()
    elif exp is Experiment.Asymmetry:
        ax.plot(d["mu"], d["max_abs_A_R"])
        ax.set_xlabel("n0 / n_th")
        ax.set_ylabel("max |A_R|")
    elif exp is Experiment.Threshold:
        ax.loglog(d["m"], d["n_th"], "o-")
        ax.set_xlabel("m")
        ax.set_ylabel("n_th")
    elif exp is Experiment.OracleCheck:
        for J in np.unique(d["J[gamma]"]):
            k = d["J[gamma]"] == J
            ax.semilogy(d["doppler"][k], d["rel_err"][k], "o-", label=f"J={J:g}")
        ax.set_xlabel("2m Omega / gamma")
        ax.set_ylabel("relative error")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out / f"{exp.value}.svg", metadata={"Date": None})
    plt.close(fig)
