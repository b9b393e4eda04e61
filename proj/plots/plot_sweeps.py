"""MI and key-rate curves from `wfqpsk sweep-mi` / `sweep-kgr` output directories.

usage: python3 plot_sweeps.py OUT_DIR [OUT_DIR ...] -o sweeps.png
"""
import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dirs", nargs="+", type=Path)
    ap.add_argument("-o", "--output", default="sweeps.png")
    args = ap.parse_args()

    fig, (ax_mi, ax_kgr) = plt.subplots(1, 2, figsize=(11, 4.2))
    for d in args.dirs:
        mi = d / "mi.csv"
        if mi.exists():
            df = pd.read_csv(mi, comment="#")
            for (m, rx, xi, sig), g in df.groupby(["m", "receiver", "visibility", "sigma_phi"]):
                style = "-" if rx == "wf" else "--"
                ax_mi.plot(g.loss_db, g.mi_bits, style, label=f"M={m} {rx} xi={xi:g} sigma={sig:g}")
        kgr = d / "kgr.csv"
        if kgr.exists():
            df = pd.read_csv(kgr, comment="#")
            for (m, xi, sig), g in df.groupby(["m", "visibility", "sigma_phi"]):
                ax_kgr.plot(g.loss_db, g.kgr_bits, label=f"M={m} xi={xi:g} sigma={sig:g}")
    ax_mi.set(xlabel="loss (dB)", ylabel="I(A;B) (bits)")
    ax_kgr.set(xlabel="loss (dB)", ylabel="KGR (bits/pulse)")
    ax_kgr.axhline(0.0, color="0.6", lw=0.8)
    for ax in (ax_mi, ax_kgr):
        ax.grid(alpha=0.3)
        if ax.lines:
            ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.output, dpi=130)


if __name__ == "__main__":
    main()
