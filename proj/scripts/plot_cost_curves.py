#!/usr/bin/env python3
"""Plot equilibrium cost curves from a `l0cs_cli cost-curve` CSV.

One panel: cost = e/lambda + rho against lambda, one pair of lines
(uninformed / informed saddle) per compression rate alpha.

Usage: plot_cost_curves.py cost-curve_<hash>.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    df = pd.read_csv(sys.argv[1])
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for (alpha, init), grp in df.groupby(["alpha", "init"]):
        style = "-" if init == "uninformed" else "--"
        grp = grp.sort_values("lambda")
        ax.plot(grp["lambda"], grp["cost"], style,
                label=rf"$\alpha={alpha}$ ({init})")
    ax.set_xscale("log")
    ax.set_xlabel(r"penalty $\lambda$")
    ax.set_ylabel(r"cost $e/\lambda + \rho$")
    ax.legend(fontsize=8)
    ax.set_title("equilibrium cost vs penalty")
    fig.tight_layout()
    out = sys.argv[2] if len(sys.argv) > 2 else "cost_curves.png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
