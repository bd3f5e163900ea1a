"""Fixed-step simulation: sensing, mode switching, control, integration, logging.

At step n every agent senses the world as it stands at t_n, the executive
updates, a command is chosen and the vehicle is integrated to t_{n+1}. Only
then does the world advance (fire first, then moving obstacles). Agents are
processed in scenario order so reruns are bit-identical.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np

from . import executive as exe
from .coverage import (
    Victim,
    build_rescue_route,
    energy,
    kmeans_partition,
    lawnmower,
    prioritize_victims,
)
from .errors import LimitViolation, NoPathFound, ObstacleTooFast, OutOfBounds, StartOrGoalBlocked
from .fire import burning_boundary, step_fire
from .geometry import normalize, wrap_angle
from .planner import Path, PlanningWorld, plan_path
from .reactive import Command, avoid_2d, avoid_3d, heading_error, track_target
from .scenario import AgentSpec, Scenario, check_placement, randomized, randomized_fire
from .vehicles import (
    Body3DState,
    HeadingAngleState,
    UnicycleState,
    step_body3d,
    step_heading,
    step_unicycle,
)
from .world import DeformableBoundary, Obstacle, TerrainObstacle, advance_obstacles, sense

GOAL_REACHED = "GoalReached"
TIMEOUT = "Timeout"
SAFETY_VIOLATION = "SafetyViolation"
MISSION_FAILED = "MissionFailed"

CSV_HEADER = ("t", "agent", "x", "y", "z", "heading", "mode", "v", "u", "min_clearance")


def fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class Metrics:
    path_length: float
    mission_time: float
    min_clearance: float
    turn_effort: float
    replans: int
    energy: float | None = None

    def as_dict(self) -> dict:
        d = {
            "path_length": self.path_length,
            "mission_time": self.mission_time,
            "min_clearance": self.min_clearance,
            "turn_effort": self.turn_effort,
            "replans": self.replans,
        }
        if self.energy is not None:
            d["energy"] = self.energy
        return d


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-agent time series; ``heading_vec`` keeps the full direction for metrics."""

    agent: str
    t: np.ndarray
    pos: np.ndarray
    heading: np.ndarray
    heading_vec: np.ndarray
    mode: tuple[str, ...]
    v: np.ndarray
    u: np.ndarray
    clearance: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True, eq=False)
class SimResult:
    status: str
    trajectories: dict[str, Trajectory]
    metrics: Metrics
    agent_metrics: dict[str, Metrics]
    replan_events: tuple[tuple[float, str], ...] = ()
    reason: str = ""
    d_eps: float = 0.0
    near_misses: int = 0
    mission: dict = field(default_factory=dict)
    scene: dict = field(default_factory=dict)


# ---------------------------------------------------------------- metrics


def _turn_angles(h: np.ndarray) -> np.ndarray:
    a, b = h[:-1], h[1:]
    if h.shape[1] == 2:
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    else:
        cross = np.linalg.norm(np.cross(a, b), axis=1)
    return np.arctan2(cross, np.sum(a * b, axis=1))


def compute_metrics(
    positions, headings=None, clearances=None, dt: float = 1.0, steps: int | None = None, replans: int = 0,
    energy_j: float | None = None,
) -> Metrics:
    """Euclidean length, steps*dt, minimum clearance and summed heading change.

    ``headings`` may be angles (N,) or direction vectors (N, 2|3).
    """
    p = np.asarray(positions, dtype=float)
    if len(p) == 0:
        raise ValueError("empty trajectory")
    length = float(np.sum(np.linalg.norm(np.diff(p, axis=0), axis=1))) if len(p) > 1 else 0.0
    effort = 0.0
    if headings is not None and len(p) > 1:
        h = np.asarray(headings, dtype=float)
        if h.ndim == 1:
            effort = float(np.sum(np.abs([wrap_angle(x) for x in np.diff(h)])))
        else:
            effort = float(np.sum(_turn_angles(h)))
    clr = math.inf if clearances is None or len(clearances) == 0 else float(np.min(clearances))
    n = len(p) - 1 if steps is None else steps
    return Metrics(length, n * dt, clr, effort, replans, energy_j)


# ---------------------------------------------------------------- agents


class _Agent:
    def __init__(self, spec: AgentSpec, role: str = "nav", terrain=None, wp_radius: float | None = None):
        self.spec = spec
        self.role = role
        self.kind = spec.kind
        self.terrain = terrain
        self.limits = spec.limits
        self.cfg = spec.exec
        self.goals = [np.asarray(g, dtype=float) for g in spec.goals]
        self.goal_idx = 0
        self.waypoints: np.ndarray | None = None
        self.wp_idx = 1
        self.ex = exe.ExecState()
        self.cmd = Command(spec.limits.V_max, 0.0)
        self.side_obstacle: int | None = None
        self.active = True
        self.done = False
        self.arrival_step: int | None = None
        self.replans: list[float] = []
        self.mapped: set[int] = set()
        self.bounds: tuple[np.ndarray, np.ndarray] | None = None
        self.rows: list[tuple] = []
        self.wp_radius = wp_radius if wp_radius is not None else max(self.cfg.goal_radius, 0.5 * spec.limits.R_min)
        s = spec.start
        if self.kind in ("unicycle", "ugv"):
            self.state = UnicycleState(float(s[0]), float(s[1]), float(spec.heading))
        elif self.kind == "body3d":
            self.state = Body3DState(np.asarray(s, dtype=float).copy(), normalize(spec.heading))
        else:
            a = normalize(spec.heading)
            self.state = HeadingAngleState(
                np.asarray(s, dtype=float).copy(), math.asin(max(-1.0, min(1.0, a[2]))), math.atan2(a[1], a[0])
            )

    @property
    def planar(self) -> bool:
        return self.kind in ("unicycle", "ugv")

    @property
    def position(self) -> np.ndarray:
        st = self.state
        if self.planar:
            z = 0.0
            if self.kind == "ugv" and self.terrain is not None:
                z = float(self.terrain.heights(np.array([st.x]), np.array([st.y]))[0])
            return np.array([st.x, st.y, z])
        return (st.e if self.kind == "body3d" else st.p).copy()

    @property
    def heading_vec(self) -> np.ndarray:
        st = self.state
        if self.planar:
            return st.heading_vector
        return st.a.copy() if self.kind == "body3d" else st.direction

    def heading_angle(self) -> float:
        h = self.heading_vec
        return float(self.state.theta) if self.planar else math.atan2(h[1], h[0])

    def control_state(self):
        """State as seen by the control laws (heading-angle agents reuse the body-frame law)."""
        if self.kind == "heading3d":
            return Body3DState(self.state.p, self.state.direction)
        return self.state

    def target(self) -> np.ndarray:
        if self.waypoints is not None and self.wp_idx < len(self.waypoints):
            w = self.waypoints[self.wp_idx]
        else:
            w = self.goals[self.goal_idx]
        return w[:2] if self.planar else w

    def final_target(self) -> np.ndarray:
        g = self.goals[self.goal_idx]
        return g[:2] if self.planar else g

    def dist_xy_or_3d(self, w: np.ndarray) -> float:
        p = self.position
        return float(np.linalg.norm(p[:2] - w[:2])) if self.planar else float(np.linalg.norm(p - w))

    def advance_waypoints(self) -> None:
        """Skip intermediate waypoints that are close or already passed."""
        if self.waypoints is None:
            return
        p = self.position[:2] if self.planar else self.position
        while self.wp_idx < len(self.waypoints) - 1:
            w = self.waypoints[self.wp_idx][: len(p)]
            prev = self.waypoints[self.wp_idx - 1][: len(p)]
            passed = float((p - w) @ (w - prev)) > 0.0
            if np.linalg.norm(p - w) <= self.wp_radius or passed:
                self.wp_idx += 1
            else:
                break

    def log(self, t: float, clearance: float, v: float, u: float) -> None:
        p = self.position
        self.rows.append((t, p, self.heading_angle(), self.heading_vec, self.ex.mode, v, u, clearance))

    def trajectory(self) -> Trajectory:
        r = self.rows
        dim = 2 if self.planar else 3
        hv = np.array([x[3] for x in r]).reshape(-1, dim)
        return Trajectory(
            self.spec.id,
            np.array([x[0] for x in r]),
            np.array([x[1] for x in r]).reshape(-1, 3),
            np.array([x[2] for x in r]),
            hv,
            tuple(x[4] for x in r),
            np.array([x[5] for x in r]),
            np.array([x[6] for x in r]),
            np.array([x[7] for x in r]),
        )

    def integrate(self, cmd: Command, dt: float) -> None:
        lim = self.limits
        if self.planar:
            self.state = step_unicycle(self.state, cmd.v, float(cmd.u), dt, lim)
            if self.kind == "ugv" and self.terrain is not None and not self.terrain.contains(self.state.x, self.state.y):
                raise OutOfBounds(f"agent {self.spec.id} left the terrain")
        elif self.kind == "body3d":
            self.state = step_body3d(self.state, cmd.v, cmd.u, dt, lim)
        else:
            s = self.state
            a = s.direction
            u = np.asarray(cmd.u, dtype=float)
            a_new = normalize(a + (u - (u @ a) * a) * dt)
            alpha = math.asin(max(-1.0, min(1.0, a_new[2])))
            beta = math.atan2(a_new[1], a_new[0])
            da = max(-lim.U_max, min(lim.U_max, (alpha - s.alpha) / dt))
            db = max(-lim.U_max, min(lim.U_max, wrap_angle(beta - s.beta) / dt))
            self.state = step_heading(s, cmd.v, da, db, dt, lim)
        if self.bounds is not None:
            p = self.position[: len(self.bounds[0])]
            if np.any(p < self.bounds[0] - 1e-9) or np.any(p > self.bounds[1] + 1e-9):
                raise OutOfBounds(f"agent {self.spec.id} left the world bounds")


def _u_mag(u) -> float:
    return float(np.linalg.norm(u))


# ---------------------------------------------------------------- planning helpers


def _planning_world(lo, hi, obstacles: Sequence[Obstacle], clearance: float, check_spacing: float) -> PlanningWorld:
    return PlanningWorld(np.asarray(lo, float), np.asarray(hi, float), tuple(obstacles), clearance, check_spacing)


def _plan(agent: _Agent, start, goal, obstacles, scn: Scenario, seed: int, hazard=None) -> np.ndarray:
    dim = 2 if agent.planar else 3
    w = scn.world
    lo, hi = w.lo[:dim], w.hi[:dim]
    if dim == 3 and len(w.lo) == 2:
        raise ValueError("3D agents need 3D world bounds")
    world = _planning_world(lo, hi, obstacles, planning_clearance(scn, agent.cfg), scn.planner.config.rrt.check_spacing)
    path = plan_path(np.asarray(start)[:dim], np.asarray(goal)[:dim], world, scn.planner.config, hazard=hazard, seed=seed)
    agent.mapped = {id(o) for o in obstacles if not o.moving and not isinstance(o, DeformableBoundary)}
    return path.waypoints


def planning_clearance(scn: Scenario, cfg: exe.ExecConfig) -> float:
    """Default: halfway between the safety margin and the avoidance trigger."""
    if scn.planner.clearance is not None:
        return scn.planner.clearance
    return 0.5 * (cfg.d_trigger + cfg.d_eps)


def _guard(scn: Scenario, cfg: exe.ExecConfig) -> float:
    """Distance at which a mapped obstacle still triggers avoidance (tracking went astray)."""
    return cfg.d_eps + 0.5 * (planning_clearance(scn, cfg) - cfg.d_eps)


# ---------------------------------------------------------------- world state


class _WorldState:
    def __init__(self, scn: Scenario, world_obstacles):
        self.scn = scn
        self.obstacles: list[Obstacle] = list(world_obstacles)
        self.fire_spec = randomized_fire(scn.fire, scn.sim.seed)
        self.fire = None
        self.boundary: DeformableBoundary | None = None
        self.fire_clock = 0.0
        self.terrain_obstacle = TerrainObstacle(terrain=scn.world.terrain) if scn.world.terrain is not None else None
        self.snapshots: list[tuple[float, np.ndarray]] = []

    def update_fire(self, t: float, dt: float) -> None:
        fs = self.fire_spec
        if fs is None:
            return
        if self.fire is None:
            if t + 1e-12 >= fs.start_time:
                self.fire = fs.ignited(fs.grid(self.scn.world.terrain), t)
                self.fire_clock = 0.0
                self._refresh(t)
            return
        self.fire_clock += dt
        if self.fire_clock + 1e-9 >= fs.dt:
            self.fire = step_fire(self.fire, fs.wind, fs.dt)
            self.fire_clock -= fs.dt
            self._refresh(t)

    def _refresh(self, t: float) -> None:
        self.boundary = burning_boundary(self.fire, self.fire_spec.boundary_inflation)
        if len(self.snapshots) == 0 or t - self.snapshots[-1][0] >= 5.0:
            self.snapshots.append((t, self.boundary.points[:, :2].copy()))

    def for_agent(self, agent: _Agent) -> list[Obstacle]:
        obs = list(self.obstacles)
        if self.boundary is not None and not self.boundary.empty:
            obs.append(self.boundary)
        if not agent.planar and self.terrain_obstacle is not None:
            obs.append(self.terrain_obstacle)
        return obs


def _clearance(p: np.ndarray, obstacles: Sequence[Obstacle]) -> float:
    best = math.inf
    q = p[None, :]
    for o in obstacles:
        best = min(best, float(o.distances(q)[0]))
    return best


# ---------------------------------------------------------------- one agent step


def _distance_rate(agent: _Agent, reading) -> float:
    p = agent.position
    q = np.asarray(reading.nearest_point, dtype=float)
    off = p - q
    vel = agent.cmd.v * (np.append(agent.heading_vec, 0.0) if agent.planar else agent.heading_vec)
    rel = vel - np.asarray(reading.surface_velocity, dtype=float)
    if agent.planar:
        off[2] = 0.0
        rel[2] = 0.0
    n = float(np.linalg.norm(off))
    if n < 1e-12:
        return -float(np.linalg.norm(rel))
    return float(off @ rel) / n


def _theta_fix(agent: _Agent, cs, target) -> float:
    """Heading error; in 3D it is signed within the plane the vehicle is currently turning in.

    Without the sign a 3D heading can sweep past the target direction without
    the error ever changing sign, so the exit test would never see the crossing.
    """
    th = heading_error(cs, target)
    if agent.planar:
        return th
    a = cs.a
    u = np.asarray(agent.cmd.u, dtype=float)
    if u.shape != (3,):
        return th
    w = u - (u @ a) * a
    nw = float(np.linalg.norm(w))
    if nw < 1e-12:
        return th
    g = np.asarray(target, dtype=float) - cs.e
    return math.atan2(float(g @ w) / nw, float(g @ a))


def _required_radius(agent: _Agent) -> float:
    u = _u_mag(agent.cmd.u)
    if agent.cmd.v <= 0 or u == 0:
        return math.inf
    return exe.required_turn_radius(agent.cmd.v, u)


def _map_plan(agent: _Agent, ws: _WorldState, scn: Scenario, seed: int) -> None:
    """Plan to the current goal over the prior map: known static obstacles (and terrain)."""
    obs = [o for o in ws.obstacles if o.known and not o.moving]
    if not agent.planar and ws.terrain_obstacle is not None:
        obs.append(ws.terrain_obstacle)
    p = agent.position
    agent.waypoints = _plan(agent, p[:2] if agent.planar else p, agent.final_target(), obs, scn, seed)
    agent.wp_idx = 1


def _step_agent(agent: _Agent, ws: _WorldState, scn: Scenario, n: int, t: float, dt: float, events: list, hybrid: bool):
    if hybrid and agent.waypoints is None:
        _map_plan(agent, ws, scn, scn.sim.seed if n == 0 else scn.sim.seed * 1000 + n)
    obstacles = ws.for_agent(agent)
    p = agent.position
    clearance = _clearance(p, obstacles)
    agent.advance_waypoints()
    heading = agent.heading_vec
    readings = sense(p, heading, obstacles, agent.spec.sensor_range, margin=agent.cfg.d_eps)
    if hybrid and agent.mapped:
        # the global plan already accounts for mapped obstacles
        guard = _guard(scn, agent.cfg)
        readings = [r for r in readings if id(obstacles[r.obstacle_index]) not in agent.mapped or r.distance <= guard]
    nearest = readings[0] if readings else None
    target = agent.target()
    cs = agent.control_state()
    theta_fix = _theta_fix(agent, cs, target)
    tel = exe.Telemetry(
        d=nearest.distance if nearest is not None else math.inf,
        d_rate=_distance_rate(agent, nearest) if nearest is not None else 0.0,
        theta_fix=theta_fix,
        required_turn_radius=_required_radius(agent),
        speed=agent.cmd.v,
        dist_to_waypoint=agent.dist_xy_or_3d(agent.final_target()),
    )
    cfg = agent.cfg if hybrid else replace(agent.cfg, R_min=0.0)
    ex, dirs = exe.update(agent.ex, tel, cfg, dt)
    agent.ex = ex
    if dirs.entered or dirs.exited:
        agent.side_obstacle = None
    if dirs.replan and hybrid:
        snapshot = list(o for o in ws.obstacles if o.known and not o.moving)
        seen = {r.obstacle_index for r in readings}
        for i in sorted(seen):
            o = obstacles[i]
            if o not in snapshot and not isinstance(o, TerrainObstacle):
                snapshot.append(o)
        if not agent.planar and ws.terrain_obstacle is not None:
            snapshot.append(ws.terrain_obstacle)
        agent.waypoints = _plan(agent, p if not agent.planar else p[:2], agent.final_target(), snapshot, scn,
                                scn.sim.seed * 1000 + n, hazard=ws.boundary)
        agent.ex = exe.after_replan(agent.ex)
        agent.wp_idx = 1
        agent.replans.append(t)
        events.append((t, agent.spec.id))
        target = agent.target()
    if agent.ex.mode == exe.AVOIDING and nearest is not None:
        if agent.side_obstacle != nearest.obstacle_index:
            agent.ex = replace(agent.ex, committed_side=None)
            agent.side_obstacle = nearest.obstacle_index
        law = avoid_2d if agent.planar else avoid_3d
        sol = law(cs, nearest, agent.spec.reactive, agent.limits, dt, side=agent.ex.committed_side)
        if agent.ex.committed_side is None:
            agent.ex = replace(agent.ex, committed_side=sol.side)
        cmd = sol.command
    else:
        cmd = track_target(cs, target, agent.limits, dt, agent.cfg.eps_theta)
    agent.log(t, clearance, cmd.v, _u_mag(cmd.u) if not agent.planar else float(cmd.u))
    agent.cmd = cmd
    agent.integrate(cmd, dt)


def _check_arrival(agent: _Agent, n_next: int) -> bool:
    """Advance through goals; returns True when the agent has reached its last goal."""
    while agent.dist_xy_or_3d(agent.final_target()) <= agent.cfg.goal_radius:
        agent.goal_idx += 1
        if agent.goal_idx >= len(agent.goals):
            agent.goal_idx = len(agent.goals) - 1
            agent.done = True
            agent.active = False
            agent.arrival_step = n_next
            return True
        agent.waypoints = None
        agent.wp_idx = 1
        agent.ex = exe.ExecState()
    return False


# ---------------------------------------------------------------- mission coordination


class _Mission:
    def __init__(self, scn: Scenario, ws: _WorldState):
        from .scenario import AgentSpec

        m = scn.mission
        self.m = m
        self.ws = ws
        terrain = scn.world.terrain
        cell = m.cell
        xs = np.arange(m.region.lo[0] + cell / 2, m.region.hi[0], cell)
        ys = np.arange(m.region.lo[1] + cell / 2, m.region.hi[1], cell)
        X, Y = np.meshgrid(xs, ys)
        cells = np.column_stack([X.ravel(), Y.ravel()])
        free = np.ones(len(cells), dtype=bool)
        c3 = np.column_stack([cells, np.zeros(len(cells))])
        for o in ws.obstacles:
            free &= o.distances(c3) > 0
        self.cells = cells[free]
        self.partition = kmeans_partition(self.cells, m.partitions, seed=scn.sim.seed)
        self.regions = self.partition.regions(self.cells, pad=cell / 2)
        ground_max = float(terrain.elevation.max())
        z = ground_max + m.footprint.altitude
        self.uavs: list[_Agent] = []
        self.ugvs: list[_Agent] = []
        self.lanes = []
        for k, reg in enumerate(self.regions):
            lane = lawnmower(reg, m.footprint)
            wps = lane.waypoints.copy()
            wps[:, 2] = z
            start = wps[0].copy()
            first = wps[1] - wps[0]
            if np.linalg.norm(first) == 0:
                first = np.array([1.0, 0.0, 0.0])
            spec = AgentSpec(
                f"uav{k}", "body3d", start, normalize(first), (wps[-1],), m.uav_limits, m.sensor_range,
                m.reactive, m.exec,
            )
            a = _Agent(spec, role="uav", terrain=terrain, wp_radius=max(m.exec.goal_radius, 0.25 * m.footprint.radius))
            a.waypoints = wps
            self.uavs.append(a)
            self.lanes.append(wps)
        centroids = self.partition.centroids
        for k in range(m.partitions):
            s = m.ugv_starts[k] if m.ugv_starts else centroids[k]
            g = np.asarray(m.safe_zone, dtype=float)
            heading = math.atan2(g[1] - s[1], g[0] - s[0])
            spec = AgentSpec(
                f"ugv{k}", "ugv", np.asarray(s, dtype=float), heading, (g,), m.ugv_limits, m.sensor_range,
                m.reactive, m.exec,
            )
            a = _Agent(spec, role="ugv", terrain=terrain)
            a.active = False
            self.ugvs.append(a)
        self.assignment: dict[int, list[Victim]] = {k: [] for k in range(m.partitions)}
        for v in m.victims:
            k = int(np.argmin(np.linalg.norm(centroids - np.asarray(v.position[:2]), axis=1)))
            self.assignment[k].append(v)
        self.detected_at: float | None = None
        self.dispatched_at: float | None = None
        self.routes: dict[str, list] = {}

    @property
    def agents(self) -> list[_Agent]:
        return self.uavs + self.ugvs

    def detect(self, t: float) -> None:
        if self.detected_at is not None:
            return
        b = self.ws.boundary
        if b is None or b.empty:
            return
        r = self.m.footprint.radius
        for a in self.uavs:
            if not a.active:
                continue
            p = a.position
            d = np.linalg.norm(b.region[:, :2] - p[:2], axis=1)
            if np.any(d <= r):
                self.detected_at = t
                return

    def dispatch_if_due(self, t: float) -> None:
        if self.dispatched_at is not None:
            return
        coverage_done = all(not a.active for a in self.uavs)
        if self.detected_at is None and not coverage_done:
            return
        self.dispatched_at = t
        for k, ugv in enumerate(self.ugvs):
            ordered = prioritize_victims(self.assignment[k], self.ws.boundary)
            route = build_rescue_route(ugv.position, ordered, self.m.safe_zone)
            ugv.goals = [np.asarray(g, dtype=float) for g in route]
            ugv.goal_idx = 0
            ugv.active = True
            self.routes[ugv.spec.id] = [v.id for v in ordered]


# ---------------------------------------------------------------- run


def _build_agents(scn: Scenario, ws: _WorldState) -> tuple[list[_Agent], _Mission | None]:
    if scn.mission is not None:
        mission = _Mission(scn, ws)
        return mission.agents, mission
    agents = [_Agent(a, terrain=scn.world.terrain) for a in scn.agents]
    for a in agents:
        dim = 2 if a.planar else len(scn.world.lo)
        a.bounds = (np.asarray(scn.world.lo[:dim], float), np.asarray(scn.world.hi[:dim], float))
    return agents, None


def run(scn: Scenario) -> SimResult:
    dt = scn.sim.dt
    world = randomized(scn.world, scn.sim.seed)
    check_placement(scn, world.obstacles)
    ws = _WorldState(scn, world.obstacles)
    hybrid = scn.planner.mode == "hybrid"
    agents, mission = _build_agents(scn, ws)
    events: list[tuple[float, str]] = []
    status, reason = TIMEOUT, ""
    n_max = int(math.floor(scn.sim.t_max / dt + 1e-9))
    ws.update_fire(0.0, dt)

    n = 0
    try:
        while n <= n_max:
            t = n * dt
            if mission is not None:
                mission.detect(t)
                mission.dispatch_if_due(t)
            active = [a for a in agents if a.active]
            for a in active:
                c = _clearance(a.position, ws.for_agent(a))
                if c <= 0.0:
                    a.log(t, c, 0.0, 0.0)
                    status, reason = SAFETY_VIOLATION, f"{a.spec.id} contact at t={fmt(t)}"
                    raise _Stop
            goal_agents = [a for a in agents if a.role in ("nav", "ugv")]
            if goal_agents and all(a.done for a in goal_agents):
                status = GOAL_REACHED
                break
            if n == n_max:
                break
            for a in active:
                _step_agent(a, ws, scn, n, t, dt, events, hybrid and a.role in ("nav", "ugv"))
                if a.role == "uav":
                    if a.wp_idx >= len(a.waypoints) - 1 and a.dist_xy_or_3d(a.waypoints[-1]) <= a.wp_radius:
                        a.active = False
                        a.done = True
                        a.arrival_step = n + 1
                        a.log((n + 1) * dt, _clearance(a.position, ws.for_agent(a)), 0.0, 0.0)
                elif _check_arrival(a, n + 1):
                    a.log((n + 1) * dt, _clearance(a.position, ws.for_agent(a)), 0.0, 0.0)
            ws.update_fire(t + dt, dt)
            ws.obstacles = advance_obstacles(ws.obstacles, dt)
            n += 1
    except _Stop:
        pass
    except (NoPathFound, StartOrGoalBlocked, ObstacleTooFast, OutOfBounds, LimitViolation) as e:
        status, reason = MISSION_FAILED, f"{type(e).__name__}: {e}"

    return _collect(scn, agents, mission, ws, status, reason, events, n, dt)


class _Stop(Exception):
    pass


def _collect(scn, agents, mission, ws, status, reason, events, n, dt) -> SimResult:
    trajs: dict[str, Trajectory] = {}
    per: dict[str, Metrics] = {}
    for a in agents:
        if not a.rows:
            continue
        tr = a.trajectory()
        trajs[a.spec.id] = tr
        steps = a.arrival_step if a.arrival_step is not None else n
        e = None
        if mission is not None and a.role == "uav":
            e = energy(tr.pos, scn.mission.energy, dt)
        per[a.spec.id] = compute_metrics(tr.pos, tr.heading_vec, tr.clearance, dt, steps, len(a.replans), e)
    if per:
        ms = list(per.values())
        energies = [m.energy for m in ms if m.energy is not None]
        total = Metrics(
            sum(m.path_length for m in ms),
            max(m.mission_time for m in ms),
            min(m.min_clearance for m in ms),
            sum(m.turn_effort for m in ms),
            sum(m.replans for m in ms),
            sum(energies) if energies else None,
        )
    else:
        total = Metrics(0.0, 0.0, math.inf, 0.0, 0)
    d_eps = min((a.cfg.d_eps for a in agents), default=0.0)
    near = int(sum(np.sum(tr.clearance < d_eps) for tr in trajs.values()))
    info = {}
    if mission is not None:
        info = {
            "detected_at": mission.detected_at,
            "dispatched_at": mission.dispatched_at,
            "ugv_arrival": {a.spec.id: (a.arrival_step * dt if a.arrival_step is not None else None) for a in mission.ugvs},
            "ugv_routes": mission.routes,
            "centroids": mission.partition.centroids.tolist(),
        }
    return SimResult(status, trajs, total, per, tuple(events), reason, d_eps, near, info, _scene(scn, ws))


def _obstacle_json(o: Obstacle) -> dict | None:
    from .world import Cylinder, Disc, Rect, Segment, Sphere

    if isinstance(o, Disc):
        return {"type": "disc", "center": o.center.tolist(), "radius": o.radius}
    if isinstance(o, Rect):
        return {"type": "rect", "corner": o.corner.tolist(), "width": o.w, "height": o.h}
    if isinstance(o, Segment):
        return {"type": "segment", "p0": o.p0.tolist(), "p1": o.p1.tolist()}
    if isinstance(o, Sphere):
        return {"type": "disc", "center": o.center[:2].tolist(), "radius": o.radius}
    if isinstance(o, Cylinder):
        return {"type": "disc", "center": o.base_center[:2].tolist(), "radius": o.radius}
    return None


def _scene(scn: Scenario, ws: _WorldState) -> dict:
    obs = [j for j in (_obstacle_json(o) for o in ws.obstacles) if j is not None]
    d_eps = min((a.exec.d_eps for a in scn.agents), default=scn.mission.exec.d_eps if scn.mission else 0.0)
    return {
        "name": scn.name,
        "bounds": [scn.world.lo[:2].tolist(), scn.world.hi[:2].tolist()],
        "obstacles_final": obs,
        "fire_snapshots": [{"t": t, "points": pts.tolist()} for t, pts in ws.snapshots],
        "d_eps": d_eps,
    }


# ---------------------------------------------------------------- output


def trajectory_csv(tr: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for k in range(len(tr)):
        p = tr.pos[k]
        w.writerow(
            [fmt(tr.t[k]), tr.agent, fmt(p[0]), fmt(p[1]), fmt(p[2]), fmt(tr.heading[k]), tr.mode[k],
             fmt(tr.v[k]), fmt(tr.u[k]), fmt(tr.clearance[k])]
        )
    return buf.getvalue()


def metrics_text(res: SimResult) -> str:
    lines = [f"status: {res.status}"]
    if res.reason:
        lines.append(f"reason: {res.reason}")
    for k, v in res.metrics.as_dict().items():
        lines.append(f"{k}: {v if isinstance(v, int) else fmt(v)}")
    lines.append(f"d_eps: {fmt(res.d_eps)}")
    lines.append(f"d_eps_warnings: {res.near_misses}")
    lines.append(f"replan_times: [{', '.join(fmt(t) for t, _ in res.replan_events)}]")
    if res.mission:
        arr = res.mission["ugv_arrival"]
        lines.append("ugv_arrival:")
        for k, v in arr.items():
            lines.append(f"  {k}: {'null' if v is None else fmt(v)}")
    lines.append("agents:")
    for aid, m in res.agent_metrics.items():
        lines.append(f"  {aid}:")
        for k, v in m.as_dict().items():
            lines.append(f"    {k}: {v if isinstance(v, int) else fmt(v)}")
    return "\n".join(lines) + "\n"


def write_outputs(res: SimResult, out_dir: str | os.PathLike) -> list[FsPath]:
    import json

    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for aid, tr in res.trajectories.items():
        p = out / f"trajectory_{aid}.csv"
        p.write_text(trajectory_csv(tr))
        written.append(p)
    p = out / "metrics.txt"
    p.write_text(metrics_text(res))
    written.append(p)
    p = out / "scene.json"
    p.write_text(json.dumps(res.scene, indent=1))
    written.append(p)
    return written


# ---------------------------------------------------------------- batches


@dataclass(frozen=True, eq=False)
class BatchResult:
    results: tuple[SimResult | None, ...]
    errors: tuple[tuple[int, str], ...]
    labels: tuple[tuple[str, int, str], ...] = ()

    def summary(self) -> str:
        """One line per run, then per-mode medians over runs that reached the goal."""
        lines = ["run scenario seed mode status path_length mission_time min_clearance replans"]
        by_mode: dict[str, list[SimResult]] = {}
        errs = dict(self.errors)
        for i, r in enumerate(self.results):
            name, seed, mode = self.labels[i] if i < len(self.labels) else ("?", -1, "?")
            if r is None:
                lines.append(f"{i} {name} {seed} {mode} Error {errs.get(i, '')}")
                continue
            m = r.metrics
            lines.append(f"{i} {name} {seed} {mode} {r.status} {fmt(m.path_length)} {fmt(m.mission_time)} "
                         f"{fmt(m.min_clearance)} {m.replans}")
            by_mode.setdefault(mode, []).append(r)
        for mode, rs in by_mode.items():
            ok = [r for r in rs if r.status == GOAL_REACHED]
            if ok:
                lines.append(
                    f"{mode}: goal_reached {len(ok)}/{len(rs)} median_path_length "
                    f"{fmt(float(np.median([r.metrics.path_length for r in ok])))} median_mission_time "
                    f"{fmt(float(np.median([r.metrics.mission_time for r in ok])))}"
                )
            else:
                lines.append(f"{mode}: goal_reached 0/{len(rs)}")
        return "\n".join(lines) + "\n"


def _run_safe(scn: Scenario):
    try:
        return run(scn), None
    except Exception as e:  # collected per scenario; the batch continues
        return None, f"{type(e).__name__}: {e}"


def run_batch(scenarios: Sequence[Scenario], workers: int = 1) -> BatchResult:
    if len(scenarios) == 0:
        raise ValueError("empty batch")
    if workers <= 1:
        outs = [_run_safe(s) for s in scenarios]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(_run_safe, scenarios))
    results = tuple(r for r, _ in outs)
    errors = tuple((i, e) for i, (_, e) in enumerate(outs) if e is not None)
    labels = tuple((s.name, s.sim.seed, s.planner.mode) for s in scenarios)
    return BatchResult(results, errors, labels)


@dataclass(frozen=True)
class Comparison:
    seeds: tuple[int, ...]
    modes: tuple[str, str]
    lengths: dict
    times: dict
    statuses: dict
    win_rate: float
    median_improvement: float
    median_time_improvement: float
    errors: tuple[tuple[int, str], ...] = ()

    def summary(self) -> str:
        a, b = self.modes
        lines = [f"pairs: {len(self.seeds)}"]
        for m in self.modes:
            L = np.array(self.lengths[m], dtype=float)
            T = np.array(self.times[m], dtype=float)
            ok = sum(s == GOAL_REACHED for s in self.statuses[m])
            lines.append(
                f"{m}: median_path_length {fmt(float(np.nanmedian(L)))} median_mission_time {fmt(float(np.nanmedian(T)))}"
                f" goal_reached {ok}/{len(L)}"
            )
        lines.append(f"paired_win_rate ({a} reached goal; {b} failed or was slower and longer): {fmt(self.win_rate)}")
        lines.append(f"median_path_improvement: {fmt(self.median_improvement)}")
        lines.append(f"median_time_improvement: {fmt(self.median_time_improvement)}")
        for i, e in self.errors:
            lines.append(f"error[{i}]: {e}")
        return "\n".join(lines) + "\n"


def compare(scn: Scenario, seeds: Sequence[int], modes=("hybrid", "reactive"), workers: int = 1) -> Comparison:
    """Paired runs of the same seed under two modes.

    A pair is a win for the first mode when it reaches the goal and the second
    either fails or is beaten on both path length and mission time. Median
    improvements are taken over pairs where both reached the goal.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("empty seed range")
    a, b = modes
    batch = [scn.with_mode(m).with_seed(s) for s in seeds for m in (a, b)]
    res = run_batch(batch, workers)
    lengths = {a: [], b: []}
    times = {a: [], b: []}
    statuses = {a: [], b: []}
    wins = 0
    imp, timp = [], []
    for k in range(len(seeds)):
        ra, rb = res.results[2 * k], res.results[2 * k + 1]
        for m, r in ((a, ra), (b, rb)):
            statuses[m].append(r.status if r else "Error")
            lengths[m].append(r.metrics.path_length if r else math.nan)
            times[m].append(r.metrics.mission_time if r else math.nan)
        if not (ra and ra.status == GOAL_REACHED):
            continue
        if not (rb and rb.status == GOAL_REACHED):
            wins += 1
            continue
        la, lb = ra.metrics.path_length, rb.metrics.path_length
        ta, tb = ra.metrics.mission_time, rb.metrics.mission_time
        if la < lb and ta < tb:
            wins += 1
        imp.append(1.0 - la / lb)
        timp.append(1.0 - ta / tb)
    return Comparison(
        seeds,
        (a, b),
        lengths,
        times,
        statuses,
        wins / len(seeds),
        float(np.median(imp)) if imp else math.nan,
        float(np.median(timp)) if timp else math.nan,
        res.errors,
    )
