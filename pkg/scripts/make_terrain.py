"""Regenerate the bundled elevation grids (ESRI ASCII) from closed-form hills."""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from hybridnav.scenario import bundled_dir
from hybridnav.world import TerrainGrid, format_ascii_grid


def hills(nx: int, ny: int, bumps, base: float = 0.0, slope=(0.0, 0.0)) -> TerrainGrid:
    y, x = np.mgrid[0:ny, 0:nx].astype(float)
    z = base + slope[0] * x + slope[1] * y
    for cx, cy, h, s in bumps:
        z += h * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * s * s))
    return TerrainGrid((0.0, 0.0), 1.0, np.round(z, 3))


GRIDS = {
    # rolling forest floor for the aerial cases
    "forest.asc": lambda: hills(61, 41, [(15, 10, 4.0, 6.0), (35, 30, 5.0, 7.0), (50, 12, 3.0, 5.0)], base=1.0),
    # valley draining towards the north-east safe zone
    "rescue.asc": lambda: hills(41, 41, [(5, 5, 3.0, 8.0), (30, 8, 4.0, 6.0), (8, 30, 3.0, 7.0)],
                                slope=(-0.02, -0.03), base=2.0),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=bundled_dir() / "terrain")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, make in GRIDS.items():
        (args.out / name).write_text(format_ascii_grid(make()))
        print(args.out / name)


if __name__ == "__main__":
    main()
