"""Run every experiment at the reference parameters and write CSV + SVG.

    python scripts/reproduce_all.py [--out results] [--workers N] [--no-svg]

Each experiment lands in its own subdirectory with a manifest.json.
"""

import argparse
import sys
import time
from pathlib import Path

from wgmrecoil.config import Experiment, load_config
from wgmrecoil.experiments import run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# experiment -> config file (reference.ini unless a dedicated file exists)
DEDICATED = {
    Experiment.TimeEvolution: "time-evolution-full.ini",
    Experiment.Spectra: "spectra.ini",
    Experiment.OracleCheck: "oracle-check.ini",
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--no-svg", action="store_true")
    ap.add_argument("--only", nargs="*", help="subset of experiment names")
    args = ap.parse_args(argv)

    out = Path(args.out)
    for exp in Experiment:
        if args.only and exp.value not in args.only:
            continue
        cfg = load_config(CONFIGS / DEDICATED.get(exp, "reference.ini"), exp)
        cfg.workers = args.workers
        cfg.emit_svg = not args.no_svg
        t0 = time.perf_counter()
        man = run(cfg, out / exp.value)
        files = ", ".join(sorted(man.outputs))
        print(f"{exp.value:<15} {time.perf_counter() - t0:7.1f}s  {files}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
