"""Paired hybrid/reactive comparison over a seed range for each scenario class."""

from __future__ import annotations

import argparse

from hybridnav.cli import parse_seeds
from hybridnav.scenario import bundled
from hybridnav.sim import compare

CLASSES = ("class_simple", "class_complex", "fire_spread")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..50"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("classes", nargs="*", default=list(CLASSES))
    args = ap.parse_args()
    for name in args.classes:
        c = compare(bundled(name), args.seeds, workers=args.workers)
        print(f"== {name}")
        print(c.summary(), end="")


if __name__ == "__main__":
    main()
