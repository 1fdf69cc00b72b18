#!/usr/bin/env python3
"""Generate a bundled synthetic dataset and write it in the dataset format.

Examples:
    python3 scripts/make_dataset.py --kind blobs --n 200 --out blobs.csv
    python3 scripts/make_dataset.py --kind glyphs --n 400 --format binary --out glyphs.bin
"""

import argparse

from neuedge.datasets import make_blobs, make_glyphs
from neuedge.netio import save_dataset_binary, save_dataset_text


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", choices=["blobs", "glyphs"], default="blobs")
    parser.add_argument("--n", type=int, default=200, help="number of samples")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--format", choices=["text", "binary"], default="text")
    parser.add_argument("--out", required=True, help="output path")
    args = parser.parse_args()

    if args.kind == "blobs":
        data = make_blobs(n_samples=args.n, seed=args.seed)
    else:
        data = make_glyphs(n_samples=args.n, seed=args.seed)

    save = save_dataset_text if args.format == "text" else save_dataset_binary
    save(data.features, data.labels, data.n_classes, args.out)
    print(f"wrote {args.n} {args.kind} samples "
          f"({data.n_features} features, {data.n_classes} classes) to {args.out}")


if __name__ == "__main__":
    main()
