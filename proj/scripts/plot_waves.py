"""Plot travelling-wave profiles written by `branchwave wave` (CSV with z,a,b,i).

    branchwave wave --i-minus 2.0 1.8 --out wave
    python scripts/plot_waves.py wave_i2.csv wave_i1.8.csv -o waves.png
"""
import argparse

import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("profiles", nargs="+")
    ap.add_argument("-o", "--output", default="waves.png")
    ap.add_argument("--zmin", type=float, default=-20.0)
    ap.add_argument("--zmax", type=float, default=20.0)
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(7, 4))
    for path in args.profiles:
        df = pd.read_csv(path)
        df = df[(df.z >= args.zmin) & (df.z <= args.zmax)]
        line, = ax.plot(df.z, df.a, label=f"a  ({path})")
        ax.plot(df.z, df.i, color=line.get_color(), linestyle="--", label=f"i  ({path})")
    ax.set_xlabel("z = x - ct")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
