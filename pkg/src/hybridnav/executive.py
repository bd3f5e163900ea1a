"""Tracking/avoidance mode switching, the avoidance timer and replan triggers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

TRACKING = "Tracking"
AVOIDING = "Avoiding"


@dataclass(frozen=True)
class ExecConfig:
    """Switching thresholds.

    ``R_min`` enables the tight-turn replan trigger when positive.
    ``exit_policy`` is ``orientation`` (heading lines up with the target and
    the timer has run K seconds) or ``distance`` (heading lines up and the
    clearance is within ``d_eps + exit_margin``).
    """

    d_trigger: float
    d_eps: float
    exit_margin: float = 4.0
    K: float = 1.5
    eps_theta: float = 0.01
    goal_radius: float = 0.5
    exit_policy: str = "orientation"
    R_min: float = 0.0
    replan_cooldown: int = 10

    def __post_init__(self):
        if not (self.d_trigger >= self.d_eps > 0):
            raise ValueError("require d_trigger >= d_eps > 0")
        if self.K <= 0 or self.goal_radius <= 0:
            raise ValueError("K and goal_radius must be positive")
        if self.exit_policy not in ("orientation", "distance"):
            raise ValueError("exit_policy must be 'orientation' or 'distance'")


@dataclass(frozen=True)
class ExecState:
    mode: str = TRACKING
    timer: float = -1.0
    active_waypoint_index: int = 0
    committed_side: int | None = None
    prev_theta_fix: float | None = None
    steps_since_replan: int = 10**9
    inside_after_exit: bool = False

    def __post_init__(self):
        if (self.mode == TRACKING) != (self.timer == -1.0):
            raise ValueError("timer must be -1 exactly while tracking")
        if self.mode == AVOIDING and self.timer < 0:
            raise ValueError("timer must be non-negative while avoiding")


@dataclass(frozen=True)
class Telemetry:
    d: float
    d_rate: float
    theta_fix: float
    required_turn_radius: float = math.inf
    speed: float = 1.0
    dist_to_waypoint: float = math.inf


@dataclass(frozen=True)
class Directives:
    mode: str
    replan: bool = False
    advance_waypoint: bool = False
    entered: bool = False
    exited: bool = False


def required_turn_radius(v: float, u_cmd: float) -> float:
    if v < 0:
        raise ValueError("speed must be non-negative")
    u = float(np.linalg.norm(u_cmd))
    if u == 0.0:
        return math.inf
    return v / u


def _oriented(prev: float | None, now: float, eps: float) -> bool:
    if abs(now) <= eps:
        return True
    # in discrete time the heading can step across the target direction
    return prev is not None and prev * now < 0 and abs(prev) < math.pi / 2 and abs(now) < math.pi / 2


def _closing_fast(tel: Telemetry, cfg: ExecConfig) -> bool:
    """Would the current closing rate eat the remaining margin within the head-on reaction time?"""
    band = cfg.d_trigger - cfg.d_eps
    if band <= 0:
        return True
    return -tel.d_rate * band >= max(tel.speed, 0.0) * (tel.d - cfg.d_eps)


def update(ex: ExecState, tel: Telemetry, cfg: ExecConfig, dt: float) -> tuple[ExecState, Directives]:
    """One switching decision.

    Entry needs ``d <= d_trigger`` with the distance shrinking. Right after an
    exit the agent is usually still inside the trigger band while sliding past
    the obstacle, so until it leaves the band again re-entry additionally
    requires a closing rate that threatens the ``d_eps`` margin.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    for name in ("d_rate", "theta_fix"):
        if not math.isfinite(getattr(tel, name)):
            raise ValueError(f"telemetry {name} must be finite")
    steps = ex.steps_since_replan + 1
    advance = tel.dist_to_waypoint <= cfg.goal_radius
    entered = exited = replan = False
    if ex.mode == TRACKING:
        inside = ex.inside_after_exit and tel.d <= cfg.d_trigger
        if tel.d <= cfg.d_trigger and tel.d_rate < 0 and (not inside or _closing_fast(tel, cfg)):
            nxt = replace(ex, mode=AVOIDING, timer=0.0, committed_side=None, inside_after_exit=False)
            entered = True
        else:
            nxt = replace(ex, inside_after_exit=inside)
    else:
        timer = ex.timer + dt
        oriented = _oriented(ex.prev_theta_fix, tel.theta_fix, cfg.eps_theta)
        if cfg.exit_policy == "orientation":
            leave = oriented and timer >= cfg.K
        else:
            leave = oriented and tel.d <= cfg.d_eps + cfg.exit_margin
        if leave:
            nxt = replace(ex, mode=TRACKING, timer=-1.0, committed_side=None, inside_after_exit=True)
            exited = True
        else:
            nxt = replace(ex, timer=timer)
            if (
                cfg.R_min > 0
                and tel.speed > 0
                and tel.required_turn_radius < cfg.R_min
                and steps >= cfg.replan_cooldown
            ):
                replan = True
    nxt = replace(nxt, prev_theta_fix=tel.theta_fix, steps_since_replan=0 if replan else steps)
    return nxt, Directives(nxt.mode, replan, advance, entered, exited)


def after_replan(ex: ExecState) -> ExecState:
    """Resume tracking at the first waypoint after the start of a fresh path.

    The fresh path already clears the obstacle that forced the replan, so the
    agent is treated like one that has just left avoidance.
    """
    return ExecState(TRACKING, -1.0, 1, None, None, 0, inside_after_exit=True)


def replan(current_position, remaining_goal, world_snapshot, planner: Callable):
    """Fresh global plan from where the agent is now; planner errors propagate."""
    return planner(np.asarray(current_position, dtype=float), np.asarray(remaining_goal, dtype=float), world_snapshot)
