"""Post-hoc SVG plots built from a run's output directory."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.patches import Circle, Rectangle  # noqa: E402

from .errors import MissingData  # noqa: E402

MODE_COLORS = {"Tracking": "tab:green", "Avoiding": "tab:red"}


def _read_trajectory(path: Path) -> dict:
    with path.open(newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise MissingData(f"{path.name} has no samples")
    return {
        "agent": rows[0]["agent"],
        "t": [float(r["t"]) for r in rows],
        "x": [float(r["x"]) for r in rows],
        "y": [float(r["y"]) for r in rows],
        "mode": [r["mode"] for r in rows],
        "clearance": [float(r["min_clearance"]) for r in rows],
    }


def load_run(result_dir: str | Path) -> tuple[list[dict], dict]:
    d = Path(result_dir)
    files = sorted(d.glob("trajectory_*.csv"))
    if not files:
        raise MissingData(f"no trajectory CSVs in {d}")
    trajs = [_read_trajectory(p) for p in files]
    scene_path = d / "scene.json"
    scene = json.loads(scene_path.read_text()) if scene_path.exists() else {}
    return trajs, scene


def _draw_obstacle(ax, o: dict) -> None:
    style = dict(facecolor="0.75", edgecolor="0.3", linewidth=0.8)
    if o["type"] == "disc":
        ax.add_patch(Circle(o["center"], o["radius"], **style))
    elif o["type"] == "rect":
        ax.add_patch(Rectangle(o["corner"], o["width"], o["height"], **style))
    elif o["type"] == "segment":
        (x0, y0), (x1, y1) = o["p0"][:2], o["p1"][:2]
        ax.plot([x0, x1], [y0, y1], color="0.3", linewidth=2)


def plot_topdown(trajs: list[dict], scene: dict, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 5))
    for o in scene.get("obstacles_final", []):
        _draw_obstacle(ax, o)
    snaps = scene.get("fire_snapshots", [])
    for k, s in enumerate(snaps):
        pts = s["points"]
        if pts:
            shade = 0.3 + 0.7 * (k + 1) / len(snaps)
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=3, color=(1.0, 0.5 * (1 - shade), 0.0),
                       alpha=shade, linewidths=0)
    for tr in trajs:
        segs = [[(tr["x"][k], tr["y"][k]), (tr["x"][k + 1], tr["y"][k + 1])] for k in range(len(tr["x"]) - 1)]
        colors = [MODE_COLORS.get(m, "tab:blue") for m in tr["mode"][:-1]]
        ax.add_collection(LineCollection(segs, colors=colors, linewidths=1.5))
        ax.plot(tr["x"][0], tr["y"][0], "ko", markersize=4)
        ax.plot(tr["x"][-1], tr["y"][-1], "k*", markersize=7)
    if "bounds" in scene:
        (x0, y0), (x1, y1) = scene["bounds"]
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
    else:
        ax.autoscale()
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    handles = [plt.Line2D([], [], color=c, label=m) for m, c in MODE_COLORS.items()]
    ax.legend(handles=handles, loc="upper right", fontsize=8)
    ax.set_title(scene.get("name", "trajectory"))
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_clearance(trajs: list[dict], d_eps: float, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for tr in trajs:
        ax.plot(tr["t"], tr["clearance"], linewidth=1.2, label=tr["agent"])
    ax.axhline(d_eps, color="red", linestyle="--", linewidth=1.2, label=f"d_eps = {d_eps:g} m")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("clearance [m]")
    ax.set_ylim(bottom=0.0)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def export_plots(result_dir: str | Path, d_eps: float | None = None) -> list[Path]:
    """Write ``plot_topdown.svg`` and ``plot_clearance.svg`` next to the run's CSVs."""
    d = Path(result_dir)
    trajs, scene = load_run(d)
    if d_eps is None:
        if "d_eps" not in scene:
            raise MissingData("d_eps unknown: scene.json missing and no value given")
        d_eps = float(scene["d_eps"])
    top, clr = d / "plot_topdown.svg", d / "plot_clearance.svg"
    plot_topdown(trajs, scene, top)
    plot_clearance(trajs, d_eps, clr)
    return [top, clr]
