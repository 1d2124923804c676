#!/usr/bin/env python3
"""Print the fully resolved default config of every experiment as INI text.

    python scripts/dump_default_configs.py [--markdown] > defaults.ini
"""

import argparse

from modlab.config import EXPERIMENT_IDS, SUBCOMMANDS, format_ini, load_config

BY_ID = {v: k for k, v in SUBCOMMANDS.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--markdown", action="store_true", help="wrap each block in a markdown section")
    args = ap.parse_args()
    for exp in EXPERIMENT_IDS:
        text = format_ini(load_config(None, exp))
        if args.markdown:
            print(f"## `{exp}` (subcommand `modlab {BY_ID[exp]}`)\n\n```ini\n{text}```\n")
        else:
            print(text)


if __name__ == "__main__":
    main()
