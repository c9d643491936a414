"""Command line entry point: ``wgmrecoil <subcommand> --config <path>``."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .config import ConfigError, Experiment, config_from_dict, load_config

SUBCOMMANDS = [e.value for e in Experiment]


def _error(kind: str, exc: BaseException, out_dir=None, code: int = 1) -> int:
    rec = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    text = json.dumps(rec, sort_keys=True)
    print(text, file=sys.stderr)
    if out_dir is not None:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / "error.json").write_text(text + "\n")
        except OSError:
            pass
    return code


def _cmd_experiment(args) -> int:
    exp = Experiment(args.command)
    try:
        if args.config:
            cfg = load_config(args.config, exp)
        else:
            # reference parameters at n0 = 1.5 n_th
            cfg = config_from_dict({"drive": {"n0_over_nth": 1.5}}, exp)
    except ConfigError as e:
        return _error("config", e, args.out, code=2)
    if args.svg:
        cfg.emit_svg = True
    if args.workers:
        cfg.workers = args.workers
    out = args.out or cfg.out_dir
    from .experiments import run

    try:
        man = run(cfg, out)
    except Exception as e:  # any module failure becomes an error record
        if args.verbose:
            traceback.print_exc()
        return _error("run", e, out)
    for name, digest in man.outputs.items():
        print(f"{Path(out) / name}  sha256={digest[:16]}")
    print(f"{Path(out) / 'manifest.json'}  ({man.wall_clock_s:.2f} s)")
    return 0


def _cmd_validate(args) -> int:
    from .validate import run_validation

    out = Path(args.out) if args.out else None

    def log(r):
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.module:<12} {r.name:<48} draws={r.draws:<5} "
              f"worst/tol={r.worst:.3g}  {r.seconds:.1f}s", flush=True)

    results = run_validation(args.draws, args.dyn_draws, args.seed, not args.skip_slow, log)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} properties passed")
    if out is not None:
        from .experiments import csv_text

        out.mkdir(parents=True, exist_ok=True)
        rows = [(r.module, r.name, r.draws, r.worst, r.passed) for r in results]
        text = csv_text(["module", "property", "draws", "worst_over_tol", "passed"], [])
        text += "".join(f"{m},\"{n}\",{d},{w!r},{int(p)}\n" for m, n, d, w, p in rows)
        (out / "validate.csv").write_text(text)
    return 1 if n_fail else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wgmrecoil", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=f"run the {Experiment(name).name} experiment")
        sp.add_argument("--config", help="config file (.ini-style) or a previous manifest.json")
        sp.add_argument("--out", help="output directory (overrides [output] out_dir)")
        sp.add_argument("--svg", action="store_true", help="also render SVG plots")
        sp.add_argument("--workers", type=int, default=0, help="process pool size for grid runs")
        sp.add_argument("-v", "--verbose", action="store_true")
        sp.set_defaults(func=_cmd_experiment)
    vp = sub.add_parser("validate", help="run the randomized invariant suite")
    vp.add_argument("--config", help="accepted for interface uniformity; unused")
    vp.add_argument("--out", help="write validate.csv here")
    vp.add_argument("--draws", type=int, default=1000)
    vp.add_argument("--dyn-draws", type=int, default=1000, help="draws for properties that integrate ODEs")
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--skip-slow", action="store_true", help="skip the full-model saturation run")
    vp.add_argument("--svg", action="store_true", help=argparse.SUPPRESS)
    vp.set_defaults(func=_cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
