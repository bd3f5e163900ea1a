"""Scenario documents: YAML loading, field-level validation and seeded variation.

A scenario has the top-level blocks ``sim``, ``world``, ``agents`` and
optionally ``fire``, ``planner`` and ``mission``. Every problem found while
parsing is collected as a ``(field, message)`` pair and raised together as
one ``InvalidScenario``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .coverage import EnergyModel, Region, SensorFootprint, Victim
from .errors import InvalidScenario
from .executive import ExecConfig
from .fire import FireGrid, WindField, drape_mask, ignite
from .planner import CostWeights, PlannerConfig, RrtParams
from .reactive import ReactiveConfig
from .vehicles import VehicleLimits
from .world import Cylinder, Disc, Obstacle, Rect, Segment, Sphere, TerrainGrid, load_ascii_grid

AGENT_KINDS = ("unicycle", "ugv", "body3d", "heading3d")
MODES = ("hybrid", "reactive")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    t_max: float = 60.0
    seed: int = 0


@dataclass(frozen=True, eq=False)
class WorldSpec:
    lo: np.ndarray
    hi: np.ndarray
    obstacles: tuple[Obstacle, ...] = ()
    terrain: TerrainGrid | None = None
    terrain_ref: str | None = None
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class FireSpec:
    dims: tuple[int, int, int]
    cell_size: float
    origin: tuple[float, float, float]
    ignition: tuple[int, int, int]
    T0: float
    T_trigger: float
    kappa: float
    rho: float
    wind: WindField
    start_time: float = 0.0
    dt: float = 1.0
    T_cap: float | None = None
    drape_depth: float | None = None
    ignition_jitter: int = 0
    boundary_inflation: float = 0.0

    def grid(self, terrain: TerrainGrid | None = None) -> FireGrid:
        g = FireGrid.empty(self.dims, self.cell_size, self.T_trigger, self.kappa, self.rho, self.origin, T_cap=self.T_cap)
        if terrain is not None and self.drape_depth is not None:
            g = replace(g, burnable=drape_mask(g, terrain, self.drape_depth))
        return g

    def ignited(self, g: FireGrid, time: float) -> FireGrid:
        return ignite(g, self.ignition, self.T0, time)


@dataclass(frozen=True)
class PlannerSpec:
    mode: str = "reactive"
    config: PlannerConfig = field(default_factory=PlannerConfig)
    clearance: float | None = None


@dataclass(frozen=True, eq=False)
class AgentSpec:
    id: str
    kind: str
    start: np.ndarray
    heading: Any
    goals: tuple[np.ndarray, ...]
    limits: VehicleLimits
    sensor_range: float
    reactive: ReactiveConfig
    exec: ExecConfig


@dataclass(frozen=True, eq=False)
class MissionSpec:
    partitions: int
    safe_zone: np.ndarray
    victims: tuple[Victim, ...]
    footprint: SensorFootprint
    energy: EnergyModel
    region: Region
    uav_limits: VehicleLimits
    ugv_limits: VehicleLimits
    ugv_starts: tuple[np.ndarray, ...] = ()
    uav_start: np.ndarray | None = None
    sensor_range: float = 6.0
    reactive: ReactiveConfig = field(default_factory=ReactiveConfig)
    exec: ExecConfig = field(default_factory=lambda: ExecConfig(2.0, 1.0))
    cell: float = 1.0


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    sim: SimConfig
    world: WorldSpec
    agents: tuple[AgentSpec, ...] = ()
    fire: FireSpec | None = None
    planner: PlannerSpec = field(default_factory=PlannerSpec)
    mission: MissionSpec | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, sim=replace(self.sim, seed=int(seed)))

    def with_mode(self, mode: str) -> "Scenario":
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        return replace(self, planner=replace(self.planner, mode=mode))


class _Issues:
    def __init__(self):
        self.items: list[tuple[str, str]] = []

    def add(self, f: str, msg: str):
        self.items.append((f, msg))

    def raise_if_any(self):
        if self.items:
            raise InvalidScenario(self.items)


def _num(d: dict, key: str, where: str, issues: _Issues, default=None, positive=False, nonneg=False):
    if key not in d:
        if default is None:
            issues.add(f"{where}.{key}", "required")
            return math.nan
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
        issues.add(f"{where}.{key}", f"expected a finite number, got {v!r}")
        return math.nan
    v = float(v)
    if positive and v <= 0:
        issues.add(f"{where}.{key}", "must be positive")
    if nonneg and v < 0:
        issues.add(f"{where}.{key}", "must be non-negative")
    return v


def _vec(d: dict, key: str, where: str, issues: _Issues, sizes=(2, 3), default=None):
    if key not in d:
        if default is None:
            issues.add(f"{where}.{key}", "required")
            return None
        return np.asarray(default, dtype=float)
    v = d[key]
    try:
        a = np.asarray(v, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        issues.add(f"{where}.{key}", f"expected a list of numbers, got {v!r}")
        return None
    if a.shape[0] not in sizes or not np.all(np.isfinite(a)):
        issues.add(f"{where}.{key}", f"expected {' or '.join(map(str, sizes))} finite numbers")
        return None
    return a


def _block(d: dict, key: str, where: str, issues: _Issues, required=False) -> dict:
    v = d.get(key)
    if v is None:
        if required:
            issues.add(f"{where}{key}", "required")
        return {}
    if not isinstance(v, dict):
        issues.add(f"{where}{key}", "expected a mapping")
        return {}
    return v


def _obstacle(o: Any, where: str, issues: _Issues) -> Obstacle | None:
    if not isinstance(o, dict):
        issues.add(where, "expected a mapping")
        return None
    kind = o.get("type")
    common = {}
    vel = _vec(o, "velocity", where, issues, default=(0.0, 0.0, 0.0))
    if vel is not None:
        common["velocity"] = vel
    common["name"] = str(o.get("name", ""))
    common["known"] = bool(o.get("known", True))
    n0 = len(issues.items)
    try:
        if kind == "disc":
            c = _vec(o, "center", where, issues)
            r = _num(o, "radius", where, issues, positive=True)
            return None if len(issues.items) > n0 else Disc(c, r, **common)
        if kind == "rect":
            c = _vec(o, "corner", where, issues, sizes=(2,))
            w = _num(o, "width", where, issues, positive=True)
            h = _num(o, "height", where, issues, positive=True)
            return None if len(issues.items) > n0 else Rect(c, w, h, **common)
        if kind == "segment":
            a = _vec(o, "p0", where, issues, sizes=(2,))
            b = _vec(o, "p1", where, issues, sizes=(2,))
            return None if len(issues.items) > n0 else Segment(a, b, **common)
        if kind == "sphere":
            c = _vec(o, "center", where, issues, sizes=(3,))
            r = _num(o, "radius", where, issues, positive=True)
            return None if len(issues.items) > n0 else Sphere(c, r, **common)
        if kind == "cylinder":
            c = _vec(o, "base", where, issues, sizes=(3,))
            r = _num(o, "radius", where, issues, positive=True)
            h = _num(o, "height", where, issues, positive=True)
            return None if len(issues.items) > n0 else Cylinder(c, r, h, **common)
    except ValueError as e:
        issues.add(where, str(e))
        return None
    issues.add(f"{where}.type", f"unknown obstacle type {kind!r}")
    return None


def _limits(d: dict, where: str, issues: _Issues) -> VehicleLimits | None:
    V = _num(d, "V_max", where, issues, positive=True)
    U = _num(d, "U_max", where, issues, positive=True)
    if not (V > 0 and U > 0):
        return None
    return VehicleLimits(V, U)


def _reactive(d: dict, where: str, issues: _Issues, d_eps: float) -> ReactiveConfig:
    a = _num(d, "alpha_safe", where, issues, default=math.pi / 5)
    tb = d.get("side_tiebreak", "ccw")
    try:
        return ReactiveConfig(a, d_eps if d_eps > 0 else 1.0, tb)
    except ValueError as e:
        issues.add(where, str(e))
        return ReactiveConfig()


def _exec(d: dict, where: str, issues: _Issues, R_min: float) -> ExecConfig | None:
    kw = {
        "d_trigger": _num(d, "d_trigger", where, issues, positive=True),
        "d_eps": _num(d, "d_eps", where, issues, positive=True),
        "exit_margin": _num(d, "exit_margin", where, issues, default=4.0, nonneg=True),
        "K": _num(d, "K", where, issues, default=1.5, positive=True),
        "eps_theta": _num(d, "eps_theta", where, issues, default=0.01, positive=True),
        "goal_radius": _num(d, "goal_radius", where, issues, default=0.5, positive=True),
        "exit_policy": d.get("exit_policy", "orientation"),
        "R_min": R_min if d.get("replan_on_tight_turn", True) else 0.0,
        "replan_cooldown": int(d.get("replan_cooldown", 10)),
    }
    if any(isinstance(v, float) and math.isnan(v) for v in kw.values()):
        return None
    try:
        return ExecConfig(**kw)
    except ValueError as e:
        issues.add(where, str(e))
        return None


def _agent(a: Any, k: int, dim: int, issues: _Issues) -> AgentSpec | None:
    where = f"agents[{k}]"
    if not isinstance(a, dict):
        issues.add(where, "expected a mapping")
        return None
    n0 = len(issues.items)
    kind = a.get("type", "unicycle")
    if kind not in AGENT_KINDS:
        issues.add(f"{where}.type", f"must be one of {', '.join(AGENT_KINDS)}")
    spatial = kind in ("body3d", "heading3d")
    size = (3,) if spatial else (2, 3)
    start = _vec(a, "start", where, issues, sizes=size)
    goals_raw = a.get("goals")
    goals = []
    if goals_raw is None:
        g = _vec(a, "goal", where, issues, sizes=size)
        if g is not None:
            goals = [g]
    elif not isinstance(goals_raw, list) or not goals_raw:
        issues.add(f"{where}.goals", "expected a non-empty list")
    else:
        for j, g in enumerate(goals_raw):
            v = _vec({"g": g}, "g", f"{where}.goals[{j}]", issues, sizes=size)
            if v is not None:
                goals.append(v)
    if spatial:
        heading = _vec(a, "orientation", where, issues, sizes=(3,), default=(1.0, 0.0, 0.0))
        if heading is not None and np.linalg.norm(heading) == 0:
            issues.add(f"{where}.orientation", "must be non-zero")
    else:
        heading = _num(a, "heading", where, issues, default=0.0)
    lim = _limits(_block(a, "limits", f"{where}.", issues, required=True), f"{where}.limits", issues)
    sensor = _block(a, "sensor", f"{where}.", issues)
    rng_ = _num(sensor, "range", f"{where}.sensor", issues, default=10.0, positive=True)
    ex = _exec(_block(a, "exec", f"{where}.", issues, required=True), f"{where}.exec", issues, lim.R_min if lim else 0.0)
    re = _reactive(_block(a, "reactive", f"{where}.", issues), f"{where}.reactive", issues, ex.d_eps if ex else 1.0)
    if len(issues.items) > n0:
        return None
    return AgentSpec(str(a.get("id", f"agent{k}")), kind, start, heading, tuple(goals), lim, rng_, re, ex)


def _fire(d: dict, issues: _Issues) -> FireSpec | None:
    where = "fire"
    n0 = len(issues.items)
    dims = d.get("dims")
    if not (isinstance(dims, list) and len(dims) in (2, 3) and all(isinstance(x, int) and x > 0 for x in dims)):
        issues.add(f"{where}.dims", "expected [nx, ny] or [nx, ny, nz] positive integers")
        dims = [1, 1, 1]
    dims = tuple(dims) + (1,) * (3 - len(dims))
    cell = _num(d, "cell_size", where, issues, default=1.0, positive=True)
    origin = _vec(d, "origin", where, issues, default=(0.0, 0.0, 0.0))
    ign = d.get("ignition")
    if not (isinstance(ign, list) and len(ign) in (2, 3) and all(isinstance(x, int) for x in ign)):
        issues.add(f"{where}.ignition", "expected integer cell index [i, j] or [i, j, k]")
        ign = [0, 0, 0]
    ign = tuple(ign) + (0,) * (3 - len(ign))
    if not all(0 <= i < n for i, n in zip(ign, dims)):
        issues.add(f"{where}.ignition", f"cell {list(ign)} outside grid {list(dims)}")
    T_trig = _num(d, "T_trigger", where, issues, positive=True)
    T0 = _num(d, "T0", where, issues, positive=True)
    if T0 <= T_trig:
        issues.add(f"{where}.T0", "must exceed T_trigger")
    kappa = _num(d, "kappa", where, issues, nonneg=True)
    rho = _num(d, "rho", where, issues, nonneg=True)
    wind = d.get("wind", [0.0, 0.0, 0.0])
    try:
        scale = d.get("intensity_scale")
        w = WindField.from_components(wind, None if scale is None else float(scale))
    except (TypeError, ValueError) as e:
        issues.add(f"{where}.wind", str(e))
        w = WindField()
    start = _num(d, "start_time", where, issues, default=0.0, nonneg=True)
    fdt = _num(d, "dt", where, issues, default=1.0, positive=True)
    cap = d.get("T_cap")
    depth = d.get("drape_depth")
    jit = d.get("ignition_jitter", 0)
    if not (isinstance(jit, int) and jit >= 0):
        issues.add(f"{where}.ignition_jitter", "expected a non-negative integer")
        jit = 0
    inflation = _num(d, "boundary_inflation", where, issues, default=0.0, nonneg=True)
    if len(issues.items) > n0:
        return None
    if origin is not None and origin.shape[0] == 2:
        origin = np.append(origin, 0.0)
    return FireSpec(
        dims, cell, tuple(map(float, origin)), ign, T0, T_trig, kappa, rho, w, start, fdt,
        None if cap is None else float(cap), None if depth is None else float(depth), jit,
        inflation,
    )


def _planner(d: dict, issues: _Issues) -> PlannerSpec:
    where = "planner"
    mode = d.get("mode", "reactive")
    if mode not in MODES:
        issues.add(f"{where}.mode", f"must be one of {', '.join(MODES)}")
        mode = "reactive"
    r = _block(d, "rrt", f"{where}.", issues)
    w = _block(d, "weights", f"{where}.", issues)
    try:
        rrt = RrtParams(
            step_size=_num(r, "step", f"{where}.rrt", issues, default=1.0, positive=True),
            max_iterations=int(r.get("max_iter", 4000)),
            goal_bias=_num(r, "goal_bias", f"{where}.rrt", issues, default=0.1, nonneg=True),
            corridor_bias=_num(r, "corridor_bias", f"{where}.rrt", issues, default=0.3, nonneg=True),
            rng_seed=int(r.get("seed", 0)),
        )
    except ValueError as e:
        issues.add(f"{where}.rrt", str(e))
        rrt = RrtParams()
    try:
        weights = CostWeights(
            float(w.get("alpha", 1.0)), float(w.get("beta", 0.0)), float(w.get("gamma", 0.0))
        )
    except ValueError as e:
        issues.add(f"{where}.weights", str(e))
        weights = CostWeights()
    cfg = PlannerConfig(
        rrt=rrt,
        weights=weights,
        rounds=int(d.get("rounds", 3)),
        smooth=bool(d.get("smooth", True)),
    )
    clearance = d.get("clearance")
    return PlannerSpec(mode, cfg, None if clearance is None else float(clearance))


def _mission(d: dict, world: WorldSpec, issues: _Issues) -> MissionSpec | None:
    where = "mission"
    n0 = len(issues.items)
    k = d.get("partitions")
    if not (isinstance(k, int) and k >= 1):
        issues.add(f"{where}.partitions", "expected a positive integer")
        k = 1
    safe = _vec(d, "safe_zone", where, issues, sizes=(3,))
    victims = []
    seen = set()
    for j, v in enumerate(d.get("victims") or []):
        w = f"{where}.victims[{j}]"
        if not isinstance(v, dict) or "id" not in v:
            issues.add(w, "expected {id, pos}")
            continue
        if v["id"] in seen:
            issues.add(f"{w}.id", f"duplicate victim id {v['id']}")
        seen.add(v["id"])
        pos = _vec(v, "pos", w, issues, sizes=(3,))
        if pos is not None:
            victims.append(Victim(int(v["id"]), tuple(map(float, pos))))
    fp = _block(d, "footprint", f"{where}.", issues, required=True)
    footprint = SensorFootprint(
        _num(fp, "altitude", f"{where}.footprint", issues, positive=True),
        _num(fp, "half_angle", f"{where}.footprint", issues, positive=True),
    )
    en = _block(d, "energy", f"{where}.", issues)
    try:
        energy = EnergyModel(
            _num(en, "p_base", f"{where}.energy", issues, default=100.0),
            _num(en, "p_speed", f"{where}.energy", issues, default=5.0),
            _num(en, "p_climb", f"{where}.energy", issues, default=20.0),
        )
    except ValueError as e:
        issues.add(f"{where}.energy", str(e))
        energy = EnergyModel()
    reg = d.get("region")
    if reg is None:
        region = Region((float(world.lo[0]), float(world.lo[1])), (float(world.hi[0]), float(world.hi[1])))
    else:
        lo = _vec(reg, "lo", f"{where}.region", issues, sizes=(2,))
        hi = _vec(reg, "hi", f"{where}.region", issues, sizes=(2,))
        region = Region(tuple(lo), tuple(hi)) if lo is not None and hi is not None else None
    uav = _limits(_block(d, "uav_limits", f"{where}.", issues, required=True), f"{where}.uav_limits", issues)
    ugv = _limits(_block(d, "ugv_limits", f"{where}.", issues, required=True), f"{where}.ugv_limits", issues)
    starts = []
    for j, s in enumerate(d.get("ugv_starts") or []):
        v = _vec({"s": s}, "s", f"{where}.ugv_starts[{j}]", issues, sizes=(2, 3))
        if v is not None:
            starts.append(v)
    if starts and len(starts) != k:
        issues.add(f"{where}.ugv_starts", f"need one start per partition ({k})")
    uav_start = _vec(d, "uav_start", where, issues, sizes=(2,), default=region.lo if region else (0, 0))
    ex = _exec(_block(d, "exec", f"{where}.", issues) or {"d_trigger": 2.0, "d_eps": 1.0}, f"{where}.exec", issues,
               ugv.R_min if ugv else 0.0)
    re = _reactive(_block(d, "reactive", f"{where}.", issues), f"{where}.reactive", issues, ex.d_eps if ex else 1.0)
    rng_ = _num(d, "sensor_range", where, issues, default=6.0, positive=True)
    if len(issues.items) > n0:
        return None
    return MissionSpec(
        k, safe, tuple(victims), footprint, energy, region, uav, ugv, tuple(starts), uav_start, rng_, re, ex,
        float(d.get("cell", 1.0)),
    )


def scenario_from_dict(doc: Any, base_dir: str | Path = ".") -> Scenario:
    issues = _Issues()
    if not isinstance(doc, dict):
        raise InvalidScenario([("<root>", "expected a mapping")])
    name = str(doc.get("name", "scenario"))
    s = _block(doc, "sim", "", issues)
    dt = _num(s, "dt", "sim", issues, default=0.05, positive=True)
    t_max = _num(s, "t_max", "sim", issues, default=60.0, positive=True)
    seed = s.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        issues.add("sim.seed", "expected a non-negative integer")
        seed = 0
    sim = SimConfig(dt, t_max, seed)

    w = _block(doc, "world", "", issues, required=True)
    b = w.get("bounds")
    lo = hi = None
    try:
        lo, hi = (np.asarray(b[0], dtype=float), np.asarray(b[1], dtype=float))
        if lo.shape != hi.shape or lo.shape[0] not in (2, 3) or np.any(hi <= lo):
            raise ValueError
    except (TypeError, ValueError, IndexError):
        issues.add("world.bounds", "expected [[lo...], [hi...]] with hi > lo in 2 or 3 dimensions")
        lo, hi = np.zeros(2), np.ones(2)
    obstacles = []
    for j, o in enumerate(w.get("obstacles") or []):
        ob = _obstacle(o, f"world.obstacles[{j}]", issues)
        if ob is not None:
            obstacles.append(ob)
    terrain = None
    tref = w.get("terrain")
    if tref is not None:
        path = Path(base_dir) / str(tref)
        try:
            terrain = load_ascii_grid(path)
        except (OSError, ValueError) as e:
            issues.add("world.terrain", f"cannot load {tref}: {e}")
    jitter = _num(_block(w, "randomize", "world.", issues), "jitter", "world.randomize", issues, default=0.0, nonneg=True)
    world = WorldSpec(lo, hi, tuple(obstacles), terrain, tref, jitter)

    fire = _fire(doc["fire"], issues) if isinstance(doc.get("fire"), dict) else None
    if "fire" in doc and not isinstance(doc.get("fire"), dict):
        issues.add("fire", "expected a mapping")
    planner = _planner(_block(doc, "planner", "", issues), issues)

    agents = []
    raw_agents = doc.get("agents") or []
    if not isinstance(raw_agents, list):
        issues.add("agents", "expected a list")
        raw_agents = []
    for k, a in enumerate(raw_agents):
        ag = _agent(a, k, world.dim, issues)
        if ag is not None:
            agents.append(ag)
    ids = [a.id for a in agents]
    if len(set(ids)) != len(ids):
        issues.add("agents", "agent ids must be unique")
    mission = None
    if isinstance(doc.get("mission"), dict):
        mission = _mission(doc["mission"], world, issues)
        if terrain is None:
            issues.add("world.terrain", "missions need a terrain grid")
    if not agents and mission is None:
        issues.add("agents", "at least one agent or a mission block is required")

    issues.raise_if_any()
    scn = Scenario(name, sim, world, tuple(agents), fire, planner, mission, raw=doc)
    check_placement(scn, randomized(scn.world, seed).obstacles)
    return scn


def check_placement(scn: Scenario, obstacles) -> None:
    """Every start and goal inside the bounds and clear of obstacles at t = 0."""
    issues = _Issues()
    w = scn.world
    for k, a in enumerate(scn.agents):
        for label, p in [("start", a.start)] + [(f"goals[{j}]", g) for j, g in enumerate(a.goals)]:
            q = p[: w.dim]
            if np.any(q < w.lo) or np.any(q > w.hi):
                issues.add(f"agents[{k}].{label}", "outside world bounds")
                continue
            p3 = np.append(p, 0.0) if len(p) == 2 else p
            for j, o in enumerate(obstacles):
                if float(o.distances(p3[None, :])[0]) <= 0.0:
                    issues.add(f"agents[{k}].{label}", f"inside obstacle {j}")
    issues.raise_if_any()


def randomized(world: WorldSpec, seed: int) -> WorldSpec:
    """Static obstacles shifted horizontally by a seeded uniform jitter."""
    if world.jitter <= 0:
        return world
    rng = np.random.default_rng(seed)
    out = []
    for o in world.obstacles:
        delta = np.zeros(3)
        delta[:2] = rng.uniform(-world.jitter, world.jitter, size=2)
        out.append(o.translated(delta))
    return replace(world, obstacles=tuple(out))


def randomized_fire(fire: FireSpec | None, seed: int) -> FireSpec | None:
    """Ignition cell shifted horizontally by up to ``ignition_jitter`` cells, kept inside the grid."""
    if fire is None or fire.ignition_jitter <= 0:
        return fire
    rng = np.random.default_rng([seed, 1])
    j = fire.ignition_jitter
    d = rng.integers(-j, j + 1, size=2)
    i = min(max(fire.ignition[0] + int(d[0]), 0), fire.dims[0] - 1)
    k = min(max(fire.ignition[1] + int(d[1]), 0), fire.dims[1] - 1)
    return replace(fire, ignition=(i, k, fire.ignition[2]))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as e:
        raise InvalidScenario([("<file>", str(e))]) from e
    except yaml.YAMLError as e:
        raise InvalidScenario([("<yaml>", str(e).replace("\n", " "))]) from e
    return scenario_from_dict(doc, path.parent)


def bundled_dir() -> Path:
    return Path(__file__).with_name("scenarios")


def bundled(name: str) -> Scenario:
    return load_scenario(bundled_dir() / f"{name}.yaml")
