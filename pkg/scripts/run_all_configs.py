#!/usr/bin/env python3
"""Run every ``configs/*.ini`` through the CLI and print one status line each.

    python scripts/run_all_configs.py --out runs/ [--skip irregularity_fbm,strichartz]
"""

import argparse
import sys
import time
from pathlib import Path

from modlab.cli.main import main as modlab_main
from modlab.config import SUBCOMMANDS, load_config

ROOT = Path(__file__).resolve().parent.parent
BY_ID = {v: k for k, v in SUBCOMMANDS.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="modlab-out")
    ap.add_argument("--skip", default="", help="comma-separated config stems to skip")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    skip = {s for s in args.skip.split(",") if s}
    status = 0
    for cfg_file in sorted((ROOT / "configs").glob("*.ini")):
        if cfg_file.stem in skip:
            continue
        exp = load_config(cfg_file).experiment
        t0 = time.perf_counter()
        code = modlab_main([BY_ID[exp], "run", "--config", str(cfg_file), "--out",
                            str(Path(args.out) / cfg_file.stem), "--jobs", str(args.jobs), "--quiet"])
        label = {0: "pass", 1: "FAIL", 2: "ERROR"}[code]
        print(f"{cfg_file.stem:28s} {exp:22s} {label:5s} {time.perf_counter() - t0:7.1f}s")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
