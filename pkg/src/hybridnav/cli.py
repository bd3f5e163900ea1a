"""Command-line front end.

Exit codes: 0 success, 1 scenario validation error (one ``field: message`` per
line on stderr), 2 MissionFailed or SafetyViolation (or a failed plan),
3 Timeout.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .coverage import coverage_fraction, kmeans_partition, lawnmower
from .errors import InvalidScenario, MissingData, NoPathFound, StartOrGoalBlocked
from .fire import burning_boundary, spread_extent, step_fire
from .planner import PlanningWorld, j2_angle_sum, l1_length, plan_path
from .scenario import load_scenario, randomized, randomized_fire
from .sim import (
    GOAL_REACHED,
    TIMEOUT,
    fmt,
    metrics_text,
    compare,
    planning_clearance,
    run,
    run_batch,
    write_outputs,
)

EXIT_OK, EXIT_INVALID, EXIT_FAILED, EXIT_TIMEOUT = 0, 1, 2, 3


def parse_seeds(text: str) -> range:
    """``a..b`` inclusive, or a single integer."""
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return range(lo, hi + 1)


def _status_code(status: str) -> int:
    if status == GOAL_REACHED:
        return EXIT_OK
    if status == TIMEOUT:
        return EXIT_TIMEOUT
    return EXIT_FAILED


def _load(args):
    scn = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        scn = scn.with_seed(args.seed)
    return scn


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    _load(args)
    return EXIT_OK


def cmd_plan(args) -> int:
    scn = _load(args)
    world = randomized(scn.world, scn.sim.seed)
    known = [o for o in world.obstacles if o.known and not o.moving]
    lines = []
    out = _out(args) if args.out else None
    for a in scn.agents:
        dim = 2 if a.kind in ("unicycle", "ugv") else 3
        pw = PlanningWorld(world.lo[:dim], world.hi[:dim], tuple(known), planning_clearance(scn, a.exec),
                           scn.planner.config.rrt.check_spacing)
        try:
            path = plan_path(a.start[:dim], a.goals[0][:dim], pw, scn.planner.config, seed=scn.sim.seed)
        except (NoPathFound, StartOrGoalBlocked) as e:
            print(f"{a.id}: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_FAILED
        w = path.waypoints
        lines.append(
            f"{a.id}: waypoints {len(w)} length {fmt(path.length())} l1 {fmt(l1_length(w))} "
            f"angle_sum {fmt(j2_angle_sum(w))}"
        )
        if out is not None:
            with (out / f"plan_{a.id}.csv").open("w", newline="") as f:
                wr = csv.writer(f, lineterminator="\n")
                wr.writerow(["x", "y", "z"][:dim])
                for p in w:
                    wr.writerow([fmt(v) for v in p])
    print("\n".join(lines))
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn = _load(args)
    res = run(scn)
    out = _out(args)
    write_outputs(res, out)
    if args.format == "svg":
        from .plotting import export_plots

        export_plots(out, res.d_eps)
    if args.format == "summary" or args.verbose:
        sys.stdout.write(metrics_text(res))
    else:
        print(f"{res.status} -> {out}")
    return _status_code(res.status)


def cmd_batch(args) -> int:
    scn = load_scenario(args.scenario)
    seeds = args.seeds if args.seeds is not None else range(scn.sim.seed, scn.sim.seed + 1)
    if args.compare:
        modes = tuple(m.strip() for m in args.compare.split(","))
        if len(modes) != 2:
            raise SystemExit("--compare needs exactly two modes, e.g. hybrid,reactive")
        c = compare(scn, seeds, modes, workers=args.workers)
        text = c.summary()
    else:
        res = run_batch([scn.with_seed(s) for s in seeds], args.workers)
        text = res.summary()
    print(text, end="" if text.endswith("\n") else "\n")
    if args.out:
        (_out(args) / "summary.txt").write_text(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def cmd_fire(args) -> int:
    scn = _load(args)
    fs = randomized_fire(scn.fire, scn.sim.seed)
    if fs is None:
        print("scenario: no fire block", file=sys.stderr)
        return EXIT_INVALID
    g = fs.ignited(fs.grid(scn.world.terrain), 0.0)
    steps = args.steps if args.steps is not None else int(round(scn.sim.t_max / fs.dt))
    rows = []
    for n in range(steps + 1):
        ext = spread_extent(g, fs.ignition)
        rows.append((n * fs.dt, int(g.ignited.sum()), ext["+x"], ext["-x"], ext["+y"], ext["-y"]))
        if n < steps:
            g = step_fire(g, fs.wind, fs.dt)
    header = ["t", "ignited_cells", "extent_px", "extent_mx", "extent_py", "extent_my"]
    if args.out:
        with (_out(args) / "fire_extent.csv").open("w", newline="") as f:
            wr = csv.writer(f, lineterminator="\n")
            wr.writerow(header)
            for r in rows:
                wr.writerow([fmt(r[0]), *r[1:]])
    b = burning_boundary(g)
    t, n_cells = rows[-1][0], rows[-1][1]
    print(f"t {fmt(t)} ignited_cells {n_cells} boundary_points {len(b.region)}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    scn = _load(args)
    m = scn.mission
    if m is None:
        print("mission: block required for coverage", file=sys.stderr)
        return EXIT_INVALID
    world = randomized(scn.world, scn.sim.seed)
    xs = np.arange(m.region.lo[0] + m.cell / 2, m.region.hi[0], m.cell)
    ys = np.arange(m.region.lo[1] + m.cell / 2, m.region.hi[1], m.cell)
    X, Y = np.meshgrid(xs, ys)
    cells = np.column_stack([X.ravel(), Y.ravel()])
    c3 = np.column_stack([cells, np.zeros(len(cells))])
    free = np.ones(len(cells), dtype=bool)
    for o in world.obstacles:
        free &= o.distances(c3) > 0
    cells = cells[free]
    part = kmeans_partition(cells, m.partitions, seed=scn.sim.seed)
    out = _out(args) if args.out else None
    lines = [f"partitions {m.partitions} iterations {part.iterations} sse {fmt(part.objective_history[-1])}"]
    for k, reg in enumerate(part.regions(cells, pad=m.cell / 2)):
        lane = lawnmower(reg, m.footprint)
        cov = coverage_fraction(reg, lane, m.footprint.radius, m.cell)
        lines.append(f"partition {k}: region {list(reg.lo)}..{list(reg.hi)} waypoints {len(lane)} "
                     f"length {fmt(lane.length())} coverage {fmt(cov)}")
        if out is not None:
            with (out / f"coverage_{k}.csv").open("w", newline="") as f:
                wr = csv.writer(f, lineterminator="\n")
                wr.writerow(["x", "y", "z"])
                for p in lane.waypoints:
                    wr.writerow([fmt(v) for v in p])
    print("\n".join(lines))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import export_plots

    try:
        files = export_plots(args.out)
    except MissingData as e:
        print(f"plot: {e}", file=sys.stderr)
        return EXIT_INVALID
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hybridnav", description="Hybrid global/reactive navigation simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, scenario=True, out_required=False):
        p = sub.add_parser(name, help=help_)
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario YAML file")
        p.add_argument("--out", required=out_required, help="output directory")
        p.set_defaults(fn=fn)
        return p

    add("validate", cmd_validate, "check a scenario file")
    p = add("plan", cmd_plan, "global plan for each agent over the known map")
    p.add_argument("--seed", type=int)
    p = add("simulate", cmd_simulate, "run one scenario", out_required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("csv", "svg", "summary"), default="csv")
    p.add_argument("-v", "--verbose", action="store_true")
    p = add("batch", cmd_batch, "run a seed range, optionally comparing two modes")
    p.add_argument("--seeds", type=parse_seeds)
    p.add_argument("--compare", help="two planner modes, e.g. hybrid,reactive")
    p.add_argument("--workers", type=int, default=1)
    p = add("fire", cmd_fire, "step the fire model on its own")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p = add("coverage", cmd_coverage, "partition the mission region and plan sweep lanes")
    p.add_argument("--seed", type=int)
    add("plot", cmd_plot, "export SVG plots from a previous simulate output", scenario=False, out_required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InvalidScenario as e:
        for field_, msg in e.issues:
            print(f"{field_}: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
