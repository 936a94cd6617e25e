"""Train every (k, depth) cell and write the accuracy grid.

    python grid.py --ks 3..6 --depths 1..4 --data DIR --out results.csv [--heatmap grid.png]

DIR/k{K}/ must hold train.jsonl, val.jsonl and one or more test_LO_HI.jsonl
files, all written by `craspkit gen-data`.  The CSV has one row per
(k, depth, test bin); the heatmap marks the cells with k = depth + 2.
"""

import argparse
import csv
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))
from train import train  # noqa: E402


def int_range(text):
    lo, _, hi = text.partition("..")
    return list(range(int(lo), int(hi or lo) + 1))


def run_grid(ks, depths, data, base_cfg):
    rows = []
    for k in ks:
        folder = pathlib.Path(data) / f"k{k}"
        tests = sorted(folder.glob("test_*.jsonl"))
        for depth in depths:
            cfg = {**base_cfg, "k": k, "depth": depth, "train": str(folder / "train.jsonl"),
                   "val": str(folder / "val.jsonl"), "test": [str(t) for t in tests]}
            _, result = train(cfg)
            for t in tests:
                rows.append({"k": k, "depth": depth, "bin": t.stem[len("test_"):],
                             "accuracy": round(result["test"][str(t)], 1)})
    return rows


def heatmap(rows, ks, depths, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    for b in sorted({r["bin"] for r in rows}):
        grid = np.full((len(depths), len(ks)), np.nan)
        for r in rows:
            if r["bin"] == b:
                grid[depths.index(r["depth"]), ks.index(r["k"])] = r["accuracy"]
        fig, ax = plt.subplots()
        ax.imshow(grid, vmin=0, vmax=100, cmap="viridis", origin="lower")
        ax.set_xticks(range(len(ks)), [f"L{k}" for k in ks])
        ax.set_yticks(range(len(depths)), depths)
        ax.set_xlabel("language")
        ax.set_ylabel("depth")
        for i, depth in enumerate(depths):
            if depth + 2 in ks:
                j = ks.index(depth + 2)
                ax.add_patch(plt.Rectangle((j - 0.5, i - 0.5), 1, 1, fill=False, edgecolor="black", lw=2))
            for j in range(len(ks)):
                if not np.isnan(grid[i, j]):
                    ax.text(j, i, f"{grid[i, j]:.0f}", ha="center", va="center", color="white")
        out = pathlib.Path(path)
        fig.savefig(out.with_name(f"{out.stem}_{b}{out.suffix}"), dpi=120)
        plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--ks", type=int_range, required=True)
    ap.add_argument("--depths", type=int_range, required=True)
    ap.add_argument("--data", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--config", help="JSON with shared training settings")
    ap.add_argument("--heatmap")
    args = ap.parse_args(argv)
    base = json.loads(pathlib.Path(args.config).read_text()) if args.config else {}
    rows = run_grid(args.ks, args.depths, args.data, base)
    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["k", "depth", "bin", "accuracy"])
        w.writeheader()
        w.writerows(rows)
    if args.heatmap:
        heatmap(rows, args.ks, args.depths, args.heatmap)


if __name__ == "__main__":
    main()
