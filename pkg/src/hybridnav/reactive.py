"""Per-step control laws: target tracking and vision-cone obstacle avoidance.

The avoidance law enlarges the two silhouette edges by the escape angle,
builds a desired velocity ``v_obstacle + (V_max - |v_obstacle|) * dir(edge)``
for each side and steers toward whichever needs the smaller turn. In 3D the
same planar law runs inside the avoidance plane.

All laws are bang-bang in the turn rate. When ``dt`` is supplied the rate is
saturated so one step never overshoots the desired direction; without ``dt``
the pure sign law is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ObstacleTooFast
from .geometry import AvoidancePlane, avoidance_plane, signed_angle, wrap_angle
from .vehicles import Body3DState, UnicycleState, VehicleLimits
from .world import SensorReading

Array = NDArray[np.float64]


@dataclass(frozen=True)
class ReactiveConfig:
    alpha_safe: float = math.pi / 5
    d_eps: float = 1.0
    side_tiebreak: str = "ccw"

    def __post_init__(self):
        if not (0.0 < self.alpha_safe < math.pi / 2):
            raise ValueError("alpha_safe must lie in (0, pi/2)")
        if self.d_eps <= 0:
            raise ValueError("d_eps must be positive")
        if self.side_tiebreak not in ("ccw", "cw"):
            raise ValueError("side_tiebreak must be 'ccw' or 'cw'")


@dataclass(frozen=True)
class Command:
    """Speed and turn rate; ``u`` is a scalar in the plane or a 3-vector in space."""

    v: float
    u: float | Array


@dataclass(frozen=True)
class AvoidanceSolution:
    side: int
    beta: float
    occlusion: Array
    v_gamma: Array
    command: Command
    phi: float = 0.0


def _rate(angle: float, U_max: float, dt: float | None, eps: float = 0.0) -> float:
    """Signed bang-bang turn rate toward ``angle``; saturated to land exactly when dt is given."""
    if angle == 0.0 or abs(angle) <= eps:
        return 0.0
    s = 1.0 if angle > 0 else -1.0
    if dt is None:
        return s * U_max
    return s * min(U_max, abs(angle) / dt)


def heading_error(state, target: ArrayLike) -> float:
    """Angle from the current heading to the target direction (>= 0 in 3D)."""
    target = np.asarray(target, dtype=float)
    if isinstance(state, UnicycleState):
        return wrap_angle(math.atan2(target[1] - state.y, target[0] - state.x) - state.theta)
    g = target - state.e
    c = np.cross(state.a, g)
    return math.atan2(float(np.linalg.norm(c)), float(np.dot(state.a, g)))


def track_target(
    state, target: ArrayLike, limits: VehicleLimits, dt: float | None = None, eps_theta: float = 0.01
) -> Command:
    """Full speed with a bang-bang turn toward the target."""
    target = np.asarray(target, dtype=float)
    if isinstance(state, UnicycleState):
        theta_fix = heading_error(state, target)
        return Command(limits.V_max, _rate(theta_fix, limits.U_max, dt, eps_theta))
    g = target - state.e
    a = state.a
    ang = heading_error(state, target)
    if ang <= eps_theta:
        return Command(limits.V_max, np.zeros(3))
    w = g - np.dot(g, a) * a
    n = float(np.linalg.norm(w))
    if n < 1e-12:
        # target straight behind: any perpendicular works, pick a horizontal one
        w = np.cross([0.0, 0.0, 1.0], a)
        if np.linalg.norm(w) < 1e-12:
            w = np.array([1.0, 0.0, 0.0])
        n = float(np.linalg.norm(w))
    if dt is None:
        mag = limits.U_max
    else:
        # step_body3d turns by atan(|u| dt), so aim for tan of the remaining angle
        mag = min(limits.U_max, math.tan(min(ang, 1.5)) / dt)
    return Command(limits.V_max, (mag / n) * w)


def _planar_law(
    alphas: tuple[float, float],
    v_obs: Array,
    obs_speed: float,
    heading: Array,
    cfg: ReactiveConfig,
    limits: VehicleLimits,
    dt: float | None,
    side: int | None,
    allowed: tuple[int, ...],
):
    if obs_speed >= limits.V_max:
        raise ObstacleTooFast(f"obstacle speed {obs_speed:.3f} >= V_max {limits.V_max:.3f}")
    dV = limits.V_max - obs_speed
    betas = (alphas[0] + cfg.alpha_safe, alphas[1] - cfg.alpha_safe)
    sols = []
    for j, beta in ((1, betas[0]), (2, betas[1])):
        l = dV * np.array([math.cos(beta), math.sin(beta)])
        vg = v_obs + l
        phi = signed_angle(vg, heading) if np.linalg.norm(vg) > 1e-12 else math.pi
        sols.append((j, beta, l, vg, phi))
    if side is None:
        cands = [s for s in sols if s[0] in allowed] or sols
        if len(cands) == 2 and abs(cands[0][4]) == abs(cands[1][4]):
            pick = cands[0] if cfg.side_tiebreak == "ccw" else cands[1]
        else:
            pick = min(cands, key=lambda s: abs(s[4]))
    else:
        pick = sols[side - 1]
    j, beta, l, vg, phi = pick
    v = min(float(np.linalg.norm(vg)), limits.V_max)
    # phi is the angle from v_gamma to the heading; turning by -phi aligns them
    u = _rate(-phi, limits.U_max, dt)
    return j, beta, l, vg, v, u, phi


def avoid_2d(
    state: UnicycleState,
    reading: SensorReading,
    cfg: ReactiveConfig,
    limits: VehicleLimits,
    dt: float | None = None,
    side: int | None = None,
) -> AvoidanceSolution:
    v_obs3 = np.asarray(reading.surface_velocity, dtype=float)
    v_obs = v_obs3[:2]
    j, beta, l, vg, v, u, phi = _planar_law(
        reading.observation_angles,
        v_obs,
        float(np.linalg.norm(v_obs)),
        state.heading_vector,
        cfg,
        limits,
        dt,
        side,
        reading.allowed_sides,
    )
    return AvoidanceSolution(j, beta, l, vg, Command(v, u), phi)


def reading_plane(state: Body3DState, reading: SensorReading) -> AvoidancePlane:
    if reading.plane is not None:
        return reading.plane
    return avoidance_plane(state.e, state.a, reading.tangent, reading.aux_points)


def avoid_3d(
    state: Body3DState,
    reading: SensorReading,
    cfg: ReactiveConfig,
    limits: VehicleLimits,
    dt: float | None = None,
    side: int | None = None,
) -> AvoidanceSolution:
    """Planar law inside the avoidance plane, lifted back to a 3D turn-rate vector."""
    plane = reading_plane(state, reading)
    v_obs3 = np.asarray(reading.surface_velocity, dtype=float)
    heading2 = plane.to_plane(state.a)
    j, beta, l, vg, v, u, phi = _planar_law(
        reading.observation_angles,
        plane.to_plane(v_obs3),
        float(np.linalg.norm(v_obs3)),
        heading2,
        cfg,
        limits,
        dt,
        side,
        reading.allowed_sides,
    )
    if dt is not None and u != 0.0:
        u = math.copysign(min(limits.U_max, math.tan(min(abs(u) * dt, 1.5)) / dt), u)
    # a positive planar rate rotates the heading toward in_plane_y, i.e. about the normal
    return AvoidanceSolution(
        j, beta, plane.from_plane(l), plane.from_plane(vg), Command(v, u * plane.in_plane_y), phi
    )
