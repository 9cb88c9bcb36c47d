"""Run verify and norms on every preset and write one JSON report per run.

    python scripts/run_all_presets.py [out_dir] [--samples N]
"""

import argparse
import pathlib
import sys

from gfdlab.cli import main
from gfdlab.presets import preset_names


def parse():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", nargs="?", default="reports")
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    return ap.parse_args()


def run():
    args = parse()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name in preset_names():
        for command in ("verify", "norms"):
            path = out / f"{name}.{command}.json"
            code = main([command, "--preset", name, "--samples", str(args.samples), "--seed", str(args.seed),
                         "--out", str(path)])
            print(f"{command:7s} {name:22s} exit {code}  -> {path}")
            worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run())
