"""Kinematic vehicle models with explicit-Euler integrators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import LimitViolation
from .geometry import wrap_angle

_SLACK = 1e-9


@dataclass(frozen=True)
class VehicleLimits:
    V_max: float
    U_max: float
    allow_reverse: bool = False

    def __post_init__(self):
        if not (self.V_max > 0 and self.U_max > 0):
            raise ValueError("V_max and U_max must be positive")

    @property
    def R_min(self) -> float:
        return self.V_max / self.U_max

    def check_speed(self, v: float) -> None:
        lo = -self.V_max if self.allow_reverse else 0.0
        if not (lo - _SLACK <= v <= self.V_max + _SLACK):
            raise LimitViolation(f"speed {v} outside [{lo}, {self.V_max}]")

    def check_rate(self, u: float) -> None:
        if abs(u) > self.U_max + _SLACK:
            raise LimitViolation(f"turn rate {u} exceeds {self.U_max}")


@dataclass(frozen=True)
class UnicycleState:
    x: float
    y: float
    theta: float

    @property
    def position(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y])

    @property
    def heading_vector(self) -> NDArray[np.float64]:
        return np.array([math.cos(self.theta), math.sin(self.theta)])


@dataclass(frozen=True)
class Body3DState:
    e: NDArray[np.float64]
    a: NDArray[np.float64]


@dataclass(frozen=True)
class HeadingAngleState:
    p: NDArray[np.float64]
    alpha: float
    beta: float

    @property
    def direction(self) -> NDArray[np.float64]:
        ca = math.cos(self.alpha)
        return np.array([math.cos(self.beta) * ca, math.sin(self.beta) * ca, math.sin(self.alpha)])


def step_unicycle(s: UnicycleState, v: float, u: float, dt: float, limits: VehicleLimits) -> UnicycleState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    limits.check_speed(v)
    limits.check_rate(u)
    return UnicycleState(
        s.x + v * math.cos(s.theta) * dt,
        s.y + v * math.sin(s.theta) * dt,
        wrap_angle(s.theta + u * dt),
    )


def step_body3d(s: Body3DState, V: float, u: ArrayLike, dt: float, limits: VehicleLimits) -> Body3DState:
    """One Euler step of e' = V a, a' = u with u projected orthogonal to a."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    limits.check_speed(V)
    u = np.asarray(u, dtype=float)
    limits.check_rate(float(np.linalg.norm(u)))
    a = s.a
    u_eff = u - np.dot(u, a) * a
    a_new = a + u_eff * dt
    a_new = a_new / np.linalg.norm(a_new)
    return Body3DState(s.e + V * a * dt, a_new)


def step_heading(
    s: HeadingAngleState, v: float, d_alpha: float, d_beta: float, dt: float, limits: VehicleLimits
) -> HeadingAngleState:
    """Euler step of the flight-path/heading angle model."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    limits.check_speed(v)
    limits.check_rate(d_alpha)
    limits.check_rate(d_beta)
    p = s.p + v * s.direction * dt
    alpha = min(max(s.alpha + d_alpha * dt, -math.pi / 2), math.pi / 2)
    return HeadingAngleState(p, alpha, wrap_angle(s.beta + d_beta * dt))


def step_ugv(
    s: UnicycleState, v: float, u: float, dt: float, terrain, limits: VehicleLimits | None = None
) -> tuple[UnicycleState, float]:
    """Planar unicycle step followed by a terrain lookup for the ground height.

    Raises ``OutOfBounds`` when the new position leaves the terrain grid.
    """
    if limits is None:
        limits = VehicleLimits(max(v, 1e-12), max(abs(u), 1e-12))
    nxt = step_unicycle(s, v, u, dt, limits)
    return nxt, terrain.height(nxt.x, nxt.y)
