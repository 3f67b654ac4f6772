#!/usr/bin/env python3
"""Plot the recovery phase diagram from a `l0cs_cli phase-diagram` CSV.

Usage: plot_phase_diagram.py phase-diagram_<hash>.csv [out.png]
"""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    df = pd.read_csv(sys.argv[1])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(df["rho"], df["alpha_replica"], "o-", label=r"$\ell_0$ equilibrium (1RSB)")
    ax.plot(df["rho"], df["alpha_se_aspo"], "s-", label="ASP$_o$ (state evolution)")
    ax.plot(df["rho"], df["alpha_se_lasso"], "^-", label=r"$\ell_1$ (AMP state evolution)")
    ax.plot(df["rho"], df["alpha_diag"], "k--", lw=0.8, label=r"$\alpha = \rho_o$")
    ax.set_xlabel(r"signal density $\rho_o$")
    ax.set_ylabel(r"compression rate $\alpha$")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("perfect-recovery boundaries")
    fig.tight_layout()
    out = sys.argv[2] if len(sys.argv) > 2 else "phase_diagram.png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
