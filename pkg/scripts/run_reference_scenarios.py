#!/usr/bin/env python3
"""Run every CLI scenario with the default configuration into one directory.

Produces the five result tables (charge-curve, range, size-buffer,
update-rate, sweep) as CSV files.  Handy for regenerating the reference
outputs after a model change and diffing against a previous run.

Usage:
    python scripts/run_reference_scenarios.py [output_dir] [--seed N]
"""

import argparse
import sys
import time
from pathlib import Path

from chirploc.cli import COMMANDS, main


def run(out_dir: Path, seed: int | None) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for command in COMMANDS:
        target = out_dir / f"{command}.csv"
        argv = [command, "--out", str(target)]
        if seed is not None:
            argv += ["--seed", str(seed)]
        started = time.perf_counter()
        code = main(argv)
        elapsed = time.perf_counter() - started
        if code != 0:
            print(f"{command}: exit {code}", file=sys.stderr)
            return code
        print(f"{command:14s} -> {target}  ({elapsed:.1f} s)")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("output_dir", nargs="?", default="reference_runs",
                        help="directory for the CSV tables")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configured RNG seed")
    args = parser.parse_args()
    sys.exit(run(Path(args.output_dir), args.seed))
