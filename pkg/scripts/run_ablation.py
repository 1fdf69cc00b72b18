#!/usr/bin/env python3
"""Run the four-configuration ablation (rate baseline -> hybrid encoding ->
hardware-aware mapping -> adaptive thresholds) and print the result table.

    python3 scripts/run_ablation.py --seed 42 --out ablation.md
"""

import argparse

from neuedge.ablation import render_ablation_table, run_ablation
from neuedge.netio import atomic_write


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--n-samples", type=int, default=160)
    parser.add_argument("--epochs", type=int, default=15)
    parser.add_argument("--out", default=None, help="optional markdown output path")
    args = parser.parse_args()

    rows = run_ablation(seed=args.seed, n_samples=args.n_samples, epochs=args.epochs)
    table = render_ablation_table(rows)
    print(table)
    if args.out:
        atomic_write(args.out, table + "\n")
        print(f"table written to {args.out}")


if __name__ == "__main__":
    main()
