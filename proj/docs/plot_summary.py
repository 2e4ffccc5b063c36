#!/usr/bin/env python3
"""Plot regret curves from a kbandit summary CSV.

Usage: python3 docs/plot_summary.py out/minimax-nu32/summary_minimax-nu32.csv [plot.png]
"""
import collections
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "summary.png"

    curves = collections.defaultdict(lambda: collections.defaultdict(list))
    slopes = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            key = (row["env_id"], row["algo_id"])
            curves[key][int(row["T"])].append(float(row["final_regret"]))
            slopes[key] = row["slope"]

    fig, ax = plt.subplots(figsize=(7, 5))
    for key, by_t in sorted(curves.items()):
        ts = sorted(by_t)
        means = [sum(by_t[t]) / len(by_t[t]) for t in ts]
        label = "%s / %s (slope %s)" % (key[0], key[1], slopes[key][:6])
        ax.loglog(ts, means, marker="o", label=label)
    ax.set_xlabel("horizon T")
    ax.set_ylabel("mean cumulative regret")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print("wrote", out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
