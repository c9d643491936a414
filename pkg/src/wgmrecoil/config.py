"""Run configuration: a sectioned key-value file.

Sections are [optical], [drive], [mech], [experiment], [integrator] and
[output]; unknown sections or keys are rejected. A ``manifest.json``
written by a previous run is accepted as well and reproduces that run.
"""

from __future__ import annotations

import configparser
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from .dynamics import IntegratorConfig
from .model import (
    DriveParams,
    MechParams,
    OpticalParams,
    SystemParams,
    parse_pump_mode,
)


class ConfigError(ValueError):
    """Parse or validation failure, with the offending key when known."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        where = ""
        if key:
            where += f"[{key}] "
        if line:
            where += f"(line {line}) "
        super().__init__(where + message)
        self.key = key
        self.line = line


class Experiment(enum.Enum):
    TorqueCurve = "torque-curve"
    Bifurcation = "bifurcation"
    TimeEvolution = "time-evolution"
    PhaseDiagram = "phase-diagram"
    Spectra = "spectra"
    Asymmetry = "asymmetry"
    Threshold = "threshold"
    OracleCheck = "oracle-check"

    @classmethod
    def parse(cls, s: str) -> "Experiment":
        key = s.strip().lower().replace("_", "").replace("-", "")
        for e in cls:
            if key in (e.name.lower(), e.value.replace("-", "")):
                return e
        raise ConfigError(f"unknown experiment {s!r}", "experiment.experiment")


OPTICAL_DEFAULTS = {"m": 10, "gamma": 1.0, "kappa_ex": 1.0, "J": 0.1}
DRIVE_DEFAULTS = {"Delta": 1 / math.sqrt(3), "pump_mode": "PhaseAveraged", "delta_pump": None, "chi": None}
DRIVE_AMPLITUDE_KEYS = ("S_mag", "n0", "n0_over_nth")
MECH_DEFAULTS = {"I": 1e4, "Gamma_phi": 1.0}
INTEGRATOR_DEFAULTS = {"rel_tol": 1e-9, "abs_tol": 1e-12, "max_step": 0.01}
OUTPUT_DEFAULTS = {"out_dir": "out", "emit_svg": False, "workers": 1}

# per-experiment grid keys and their defaults
EXPERIMENT_DEFAULTS: Dict[Experiment, Dict[str, Any]] = {
    Experiment.TorqueCurve: {"mu_values": [0.5, 1.5], "doppler_max": 3.0, "points": 601},
    Experiment.Bifurcation: {"mu_min": 0.5, "mu_max": 2.0, "mu_points": 301},
    Experiment.TimeEvolution: {
        "mu_values": [0.5, 1.5], "seed": 1e-3, "t_end": 5e5, "samples": 501, "model": "reduced",
    },
    Experiment.PhaseDiagram: {
        "delta_min": 0.05, "delta_max": 2.0, "delta_points": 40,
        "mu_min": 0.0, "mu_max": 3.0, "mu_points": 61,
    },
    Experiment.Spectra: {
        "doppler_star": 0.84, "mu_star": None, "detuning_span": 3.0,
        "detuning_points": 4001, "use_weak_approx": False,
    },
    Experiment.Asymmetry: {
        "mu_min": 0.0, "mu_max": 2.0, "mu_points": 201, "profile_mu": [0.8, 1.5],
        "detuning_span": 3.0, "detuning_points": 4001, "use_weak_approx": False,
    },
    Experiment.Threshold: {"m_values": [1, 2, 5, 10, 50]},
    Experiment.OracleCheck: {
        "J_values": [0.01, 0.02, 0.05], "doppler_min": 0.05, "doppler_max": 3.0,
        "points": 20, "n0_oracle": 1.0,
    },
}

LIST_KEYS = {"mu_values", "profile_mu", "m_values", "J_values"}
INT_KEYS = {"m", "points", "mu_points", "delta_points", "detuning_points", "samples", "workers"}
BOOL_KEYS = {"emit_svg", "use_weak_approx"}
STR_KEYS = {"pump_mode", "model", "out_dir", "experiment"}


@dataclass
class RunConfig:
    params: SystemParams
    experiment: Experiment
    grids: Dict[str, Any]
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    out_dir: str = "out"
    emit_svg: bool = False
    workers: int = 1
    # the drive amplitude exactly as specified: (key, value)
    amplitude: tuple = ("n0_over_nth", 1.5)

    def resolved(self) -> Dict[str, Dict[str, Any]]:
        """Every setting with defaults materialized, in config-file layout."""
        p = self.params
        mode = p.drive.pump_mode
        drive = {"Delta": p.Delta, self.amplitude[0]: self.amplitude[1], "pump_mode": mode.name}
        if getattr(mode, "delta_pump", None) is not None:
            drive["delta_pump"] = mode.delta_pump
        if hasattr(mode, "chi"):
            drive["chi"] = mode.chi
        return {
            "optical": {"m": p.m, "gamma": p.gamma, "kappa_ex": p.optical.kappa_ex, "J": p.J},
            "drive": drive,
            "mech": {"I": p.I, "Gamma_phi": p.Gamma_phi},
            "experiment": {"experiment": self.experiment.name, **self.grids},
            "integrator": {
                "rel_tol": self.integrator.rel_tol,
                "abs_tol": self.integrator.abs_tol,
                "max_step": self.integrator.max_step,
            },
            "output": {"out_dir": self.out_dir, "emit_svg": self.emit_svg, "workers": self.workers},
        }


def _convert(key: str, raw: Any, ctx: str):
    if raw is None:
        return None
    if not isinstance(raw, str):
        return raw
    s = raw.strip()
    try:
        if key in LIST_KEYS:
            vals = [v for v in s.replace(";", ",").split(",") if v.strip()]
            return [int(v) if key == "m_values" else float(v) for v in vals]
        if key in INT_KEYS:
            f = float(s)
            if f != int(f):
                raise ValueError
            return int(f)
        if key in BOOL_KEYS:
            low = s.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if key in STR_KEYS:
            return s
        if s.lower() in ("none", "null", ""):
            return None
        return float(s)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r}", f"{ctx}.{key}") from None


def _section(raw: Dict[str, Dict[str, Any]], name: str, allowed: Dict[str, Any],
             extra_allowed=()) -> Dict[str, Any]:
    given = raw.get(name, {})
    out = dict(allowed)
    for k, v in given.items():
        if k not in allowed and k not in extra_allowed:
            raise ConfigError(f"unknown key {k!r}", f"{name}.{k}")
        out[k] = _convert(k, v, name)
    return out


def _read_ini(path: Path) -> Dict[str, Dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"parse error: {e}", line=getattr(e, "lineno", None)) from None
    return {s: dict(cp.items(s)) for s in cp.sections()}


def load_config(path, experiment: Optional[Experiment] = None) -> RunConfig:
    """Parse and validate a config file (or a previous run's manifest.json).

    ``experiment`` (from the CLI subcommand) must agree with the file's
    experiment key when both are present.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            raw = json.loads(path.read_text())["config"]
        except (json.JSONDecodeError, KeyError) as e:
            raise ConfigError(f"not a run manifest: {e}") from None
    else:
        raw = _read_ini(path)
    return config_from_dict(raw, experiment)


def config_from_dict(raw: Dict[str, Dict[str, Any]], experiment: Optional[Experiment] = None) -> RunConfig:
    known = {"optical", "drive", "mech", "experiment", "integrator", "output"}
    for s in raw:
        if s not in known:
            raise ConfigError(f"unknown section [{s}]", s)

    exp_raw = dict(raw.get("experiment", {}))
    name = exp_raw.pop("experiment", None)
    file_exp = Experiment.parse(name) if name is not None else None
    if experiment is not None and file_exp is not None and experiment is not file_exp:
        raise ConfigError(
            f"config is for {file_exp.name} but subcommand runs {experiment.name}",
            "experiment.experiment",
        )
    exp = experiment or file_exp
    if exp is None:
        raise ConfigError("no experiment given", "experiment.experiment")

    opt = _section(raw, "optical", OPTICAL_DEFAULTS)
    drv = _section(raw, "drive", DRIVE_DEFAULTS, DRIVE_AMPLITUDE_KEYS)
    mech = _section(raw, "mech", MECH_DEFAULTS)
    integ = _section(raw, "integrator", INTEGRATOR_DEFAULTS)
    out = _section(raw, "output", OUTPUT_DEFAULTS)
    grids = _section({"experiment": exp_raw}, "experiment", EXPERIMENT_DEFAULTS[exp])

    amp = [k for k in DRIVE_AMPLITUDE_KEYS if drv.get(k) is not None]
    if len(amp) != 1:
        raise ConfigError(
            f"exactly one of S_mag / n0 / n0_over_nth must be given, got {amp or 'none'}", "drive"
        )
    akey = amp[0]
    aval = drv[akey]

    try:
        optical = OpticalParams(m=opt["m"], gamma=opt["gamma"], kappa_ex=opt["kappa_ex"], J=opt["J"])
        mode = parse_pump_mode(drv["pump_mode"], drv.get("delta_pump"), drv.get("chi"))
        p = SystemParams(optical, DriveParams(Delta=drv["Delta"], pump_mode=mode),
                         MechParams(I=mech["I"], Gamma_phi=mech["Gamma_phi"]))
        if akey == "S_mag":
            p = p.with_drive(S_mag=aval)
        elif akey == "n0":
            p = p.with_n0(aval)
        else:
            p = p.with_mu(aval)
        icfg = IntegratorConfig(rel_tol=integ["rel_tol"], abs_tol=integ["abs_tol"],
                                max_step=integ["max_step"])
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(f"invalid parameters: {e}") from None

    _validate_grids(exp, grids)
    if exp is Experiment.TimeEvolution and grids["model"] == "full" and \
            mode.name not in ("FrequencyOffset", "FixedPhase"):
        raise ConfigError("the full model needs pump_mode FrequencyOffset or FixedPhase",
                          "drive.pump_mode")
    if out["workers"] < 1:
        raise ConfigError("workers must be >= 1", "output.workers")
    return RunConfig(p, exp, grids, icfg, out["out_dir"], bool(out["emit_svg"]), out["workers"],
                     (akey, aval))


def _validate_grids(exp: Experiment, g: Dict[str, Any]):
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(msg, f"experiment.{key}")

    for k in ("points", "mu_points", "delta_points", "detuning_points", "samples"):
        if k in g:
            need(g[k] >= 2, k, "grid needs at least 2 points")
    for lo, hi in (("mu_min", "mu_max"), ("delta_min", "delta_max"), ("doppler_min", "doppler_max")):
        if lo in g:
            need(g[hi] > g[lo], hi, f"{hi} must exceed {lo}")
    if exp is Experiment.PhaseDiagram:
        need(g["delta_min"] > 0, "delta_min", "phase diagram needs Delta > 0")
    if exp is Experiment.TimeEvolution:
        need(g["model"] in ("reduced", "full"), "model", "model must be 'reduced' or 'full'")
        need(g["t_end"] > 0, "t_end", "t_end must be > 0")
    if exp is Experiment.Threshold:
        need(all(m >= 1 for m in g["m_values"]), "m_values", "m must be >= 1")
    if exp is Experiment.OracleCheck:
        need(all(j > 0 for j in g["J_values"]), "J_values", "J must be > 0")
    if "detuning_span" in g:
        need(g["detuning_span"] > 0, "detuning_span", "detuning_span must be > 0")
