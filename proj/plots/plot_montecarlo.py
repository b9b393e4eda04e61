"""Photon-number difference histograms against theory from `wfqpsk montecarlo`.

usage: python3 plot_montecarlo.py OUT_DIR -o hist.png
"""
import argparse
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dir", type=Path)
    ap.add_argument("-o", "--output", default="hist.png")
    args = ap.parse_args()

    groups = {}
    for f in sorted(args.dir.glob("hist_*.csv")):
        m = re.match(r"hist_(m\d+_sig[^_]+)_k(\d+)", f.stem)
        groups.setdefault(m.group(1), []).append((int(m.group(2)), f))

    fig, axes = plt.subplots(1, len(groups), figsize=(4.5 * len(groups), 3.8), squeeze=False)
    for ax, (tag, files) in zip(axes[0], sorted(groups.items())):
        for k, f in files:
            df = pd.read_csv(f, comment="#")
            bars = ax.bar(df.d, df.probability, width=0.9, alpha=0.45, label=f"k={k}")
            ax.plot(df.d, df.theory, ".-", color=bars.patches[0].get_facecolor(), alpha=1.0, lw=0.8)
        ax.set(title=tag, xlabel="n - m", ylabel="probability")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=130)


if __name__ == "__main__":
    main()
