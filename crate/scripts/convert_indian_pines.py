#!/usr/bin/env python3
"""Convert the Indian Pines .mat files to the hyperband cube format.

Usage:
    convert_indian_pines.py Indian_pines.mat Indian_pines_gt.mat OUT_DIR

Writes OUT_DIR/indian_pines.json, indian_pines.raw (band-sequential u16
little-endian) and indian_pines_gt.csv. The uncorrected 220-band scene is
the one the reference accuracies were reported on; the 200-band
"corrected" file converts the same way.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy.io import loadmat


def only_array(mat, path):
    keys = [k for k in mat if not k.startswith("__")]
    if len(keys) != 1:
        sys.exit(f"{path}: expected one array, found {keys}")
    return keys[0], mat[keys[0]]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("cube_mat", type=Path)
    ap.add_argument("gt_mat", type=Path)
    ap.add_argument("out_dir", type=Path)
    args = ap.parse_args()

    cube_key, cube = only_array(loadmat(args.cube_mat), args.cube_mat)
    gt_key, gt = only_array(loadmat(args.gt_mat), args.gt_mat)
    if cube.ndim != 3 or gt.shape != cube.shape[:2]:
        sys.exit(f"shape mismatch: cube {cube.shape}, gt {gt.shape}")
    if cube.min() < 0 or cube.max() > 65535:
        sys.exit(f"cube values {cube.min()}..{cube.max()} do not fit u16")

    rows, cols, bands = cube.shape
    args.out_dir.mkdir(parents=True, exist_ok=True)
    # (rows, cols, bands) -> band-sequential
    cube.astype("<u2").transpose(2, 0, 1).tofile(args.out_dir / "indian_pines.raw")
    header = {
        "bands": bands,
        "rows": rows,
        "cols": cols,
        "dtype": "u16le",
        "data": "indian_pines.raw",
        "provenance": {"source": args.cube_mat.name, "key": cube_key},
    }
    (args.out_dir / "indian_pines.json").write_text(json.dumps(header, indent=2) + "\n")
    with open(args.out_dir / "indian_pines_gt.csv", "w") as f:
        f.write(f"# source={args.gt_mat.name} key={gt_key}\n")
        for row in gt.astype(int):
            f.write(",".join(map(str, row)) + "\n")

    labeled = int((gt > 0).sum())
    print(f"{rows}x{cols}x{bands} cube, {labeled} labeled pixels, {int(gt.max())} classes -> {args.out_dir}")


if __name__ == "__main__":
    main()
