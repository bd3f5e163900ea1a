"""Run every bundled scenario once and print status, clearance and timing."""

from __future__ import annotations

import argparse
import time

from hybridnav.scenario import bundled, bundled_dir
from hybridnav.sim import run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", help="fixture names (default: all)")
    args = ap.parse_args()
    names = args.names or sorted(p.stem for p in bundled_dir().glob("*.yaml"))
    t_all = time.perf_counter()
    for name in names:
        t0 = time.perf_counter()
        r = run(bundled(name))
        m = r.metrics
        print(f"{name:22s} {r.status:15s} clearance {m.min_clearance:7.3f} d_eps {r.d_eps:4.2f} "
              f"length {m.path_length:7.2f} time {m.mission_time:6.2f} replans {m.replans:2d} "
              f"wall {time.perf_counter() - t0:5.1f}s {r.reason}")
    print(f"total wall {time.perf_counter() - t_all:.1f}s")


if __name__ == "__main__":
    main()
