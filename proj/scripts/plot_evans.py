"""Plot the image of the contour under the Evans function (CSV from `branchwave evans`).

The origin should lie outside the curve when the winding number is zero. Values span many
orders of magnitude, so the default view maps E to E / |E|^(1 - p) with p = 0.1.

    branchwave evans --out evans
    python scripts/plot_evans.py evans.csv -o evans.png
"""
import argparse

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("values")
    ap.add_argument("-o", "--output", default="evans.png")
    ap.add_argument("--power", type=float, default=0.1, help="radial compression exponent, 1 for raw values")
    args = ap.parse_args()

    df = pd.read_csv(args.values)
    e = df.re_E.values + 1j * df.im_E.values
    g = df.re_gamma.values + 1j * df.im_gamma.values
    shown = e / np.abs(e) ** (1 - args.power)

    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4.5))
    left.plot(g.real, g.imag, ".-", ms=2)
    left.set_xscale("symlog", linthresh=1e-3)
    left.set_yscale("symlog", linthresh=1e-3)
    left.set_title("contour in the gamma plane")
    right.plot(shown.real, shown.imag, ".-", ms=2)
    right.plot([0], [0], "kx")
    right.set_aspect("equal")
    right.set_title(f"E(gamma), radius compressed by power {args.power:g}")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
