"""Plot snapshots of a `branchwave pde` run (CSV with t,x,A,I).

    branchwave pde --out pde
    python scripts/plot_pde.py pde_series.csv --times 0 5 10 15 20 -o pde.png
"""
import argparse

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("series")
    ap.add_argument("--times", type=float, nargs="*", default=[0, 5, 10, 15, 20])
    ap.add_argument("-o", "--output", default="pde.png")
    args = ap.parse_args()

    df = pd.read_csv(args.series)
    stamps = np.unique(df.t.values)
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    for want in args.times:
        t = stamps[np.argmin(np.abs(stamps - want))]
        snap = df[df.t == t]
        top.plot(snap.x, snap.A, label=f"t = {t:g}")
        bottom.plot(snap.x, snap.I, label=f"t = {t:g}")
    top.set_ylabel("A (active)")
    bottom.set_ylabel("I (inactive)")
    bottom.set_xlabel("x")
    top.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
