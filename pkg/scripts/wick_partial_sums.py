#!/usr/bin/env python3
"""Dyadic partial sums of the Wick weight sum with tail bounds.

    python scripts/wick_partial_sums.py --r 1.1,1.5,2.0 --kmax 12
"""

import argparse

from modlab.resonance import wick_partial_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", default="1.1,1.5,2.0")
    ap.add_argument("--kmax", type=int, default=11)
    args = ap.parse_args()
    for r in (float(x) for x in args.r.split(",")):
        print(f"r'rho = {r}")
        print(f"{'M':>6} {'S(M)':>14} {'S(M)-S(M/2)':>14} {'tail bound':>12}")
        for row in wick_partial_table(r, range(args.kmax + 1)):
            diff = "" if row["diff"] is None else f"{row['diff']:.6g}"
            print(f"{row['M']:>6} {row['S']:>14.8g} {diff:>14} {row['tail_bound']:>12.4g}")


if __name__ == "__main__":
    main()
