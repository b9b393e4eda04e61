"""Allan deviation and ASD of the lock conditions written by `wfqpsk lock`.

usage: python3 plot_lock.py OUT_DIR -o lock.png
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dir", type=Path)
    ap.add_argument("-o", "--output", default="lock.png")
    args = ap.parse_args()

    fig, (ax_a, ax_s) = plt.subplots(1, 2, figsize=(11, 4.2))
    for f in sorted(args.dir.glob("allan_*.csv")):
        df = pd.read_csv(f, comment="#")
        label = f.stem.removeprefix("allan_").replace("_", "/")
        ax_a.errorbar(df.iloc[:, 0], df.iloc[:, 1], yerr=df.iloc[:, 2], label=label, capsize=2)
    for f in sorted(args.dir.glob("asd_*.csv")):
        df = pd.read_csv(f, comment="#")
        df = df[df.iloc[:, 0] > 0]
        ax_s.plot(df.iloc[:, 0], df.iloc[:, 1], lw=0.8, label=f.stem.removeprefix("asd_").replace("_", "/"))
    ax_a.set(xscale="log", yscale="log", xlabel="tau (s)", ylabel="Allan deviation (rad/s)")
    ax_s.set(xscale="log", yscale="log", xlabel="f (Hz)", ylabel="ASD (rad/sqrt(Hz))")
    for ax in (ax_a, ax_s):
        ax.grid(alpha=0.3, which="both")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=130)


if __name__ == "__main__":
    main()
