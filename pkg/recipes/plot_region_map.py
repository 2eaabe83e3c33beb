#!/usr/bin/env python3
"""
Plot a region map written by ``gaussian-locality sweep``.

Usage:
    gaussian-locality sweep --grid 50x50 --out map.csv
    python recipes/plot_region_map.py map.csv map.png

Requires the ``plot`` extra (matplotlib).
"""

import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from gaussian_locality.certifier import boundary_eta
from gaussian_locality.models import VerdictStatus

STATUS_ORDER = [
    VerdictStatus.LHV_CERTIFIED.value,
    VerdictStatus.UNDETERMINED.value,
    VerdictStatus.CHSH_VIOLATING.value,
]
COLOURS = ListedColormap(["#4c9f70", "#d9d9d9", "#c0504d"])


def load_map(path: Path):
    """Read the sweep CSV into eta/nu axes and a status-index grid."""
    rows = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
    etas = np.unique(rows["eta"])
    nus = np.unique(rows["nu"])
    grid = np.zeros((len(etas), len(nus)))
    for row in rows:
        i = np.searchsorted(etas, row["eta"])
        j = np.searchsorted(nus, row["nu"])
        grid[i, j] = STATUS_ORDER.index(str(row["status"]))
    return etas, nus, grid


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(2)

    source = Path(sys.argv[1])
    target = Path(sys.argv[2]) if len(sys.argv) > 2 else source.with_suffix(".png")
    epsilon = float(sys.argv[3]) if len(sys.argv) > 3 else 0.02

    etas, nus, grid = load_map(source)

    fig, ax = plt.subplots(figsize=(6, 5))
    ax.pcolormesh(nus, etas, grid, cmap=COLOURS, vmin=0, vmax=2, shading="nearest")

    boundary_nus = np.linspace(nus[0], nus[-1], 200)
    boundary = [boundary_eta(nu, epsilon) for nu in boundary_nus]
    ax.plot(
        boundary_nus,
        [np.nan if eta is None else eta for eta in boundary],
        color="black",
        linewidth=1.5,
        label="t_max = t*",
    )

    ax.set_xlabel("ν")
    ax.set_ylabel("η")
    ax.set_ylim(etas[0], etas[-1])
    ax.set_title(f"Region map (ε = {epsilon})")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    print(f"Saved {target}")


if __name__ == "__main__":
    main()
