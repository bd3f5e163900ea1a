import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridnav import executive as exe
from hybridnav.errors import NoPathFound
from hybridnav.executive import (
    AVOIDING,
    TRACKING,
    ExecConfig,
    ExecState,
    Telemetry,
    after_replan,
    replan,
    required_turn_radius,
    update,
)
from hybridnav.planner import PlannerConfig, PlanningWorld, plan_path
from hybridnav.world import Rect

CFG = ExecConfig(d_trigger=4.5, d_eps=1.0, K=1.5, eps_theta=0.01)
DT = 0.05


def test_far_obstacle_keeps_tracking():
    ex, d = update(ExecState(), Telemetry(10.0, -1.0, 0.3), CFG, DT)
    assert ex.mode == TRACKING and ex.timer == -1.0
    assert not (d.replan or d.entered or d.exited or d.advance_waypoint)


def test_entry_at_trigger_distance():
    ex, d = update(ExecState(), Telemetry(4.5, -0.3, 0.2), CFG, DT)
    assert ex.mode == AVOIDING and ex.timer == 0.0 and d.entered


def test_no_entry_when_receding():
    ex, _ = update(ExecState(), Telemetry(3.0, 0.2, 0.2), CFG, DT)
    assert ex.mode == TRACKING


def test_exit_when_oriented_after_k():
    ex = ExecState(AVOIDING, 1.55)
    ex, d = update(ex, Telemetry(3.0, 0.1, 0.001), CFG, DT)
    assert ex.mode == TRACKING and ex.timer == -1.0 and d.exited


def test_no_exit_before_k():
    ex = ExecState(AVOIDING, 0.5)
    ex, d = update(ex, Telemetry(3.0, 0.1, 0.001), CFG, DT)
    assert ex.mode == AVOIDING and ex.timer == pytest.approx(0.55)


def test_distance_exit_policy():
    cfg = ExecConfig(d_trigger=4.5, d_eps=1.0, exit_policy="distance", exit_margin=2.0)
    ex, d = update(ExecState(AVOIDING, 0.1), Telemetry(2.5, 0.1, 0.0), cfg, DT)
    assert d.exited
    ex, d = update(ExecState(AVOIDING, 0.1), Telemetry(3.5, 0.1, 0.0), cfg, DT)
    assert not d.exited


def test_heading_crossing_counts_as_oriented():
    ex = ExecState(AVOIDING, 2.0, prev_theta_fix=0.08)
    ex, d = update(ex, Telemetry(3.0, 0.1, -0.07), CFG, DT)
    assert d.exited


def test_required_turn_radius_examples():
    assert required_turn_radius(4, 2) == 2
    assert math.isinf(required_turn_radius(3, 0.0))
    assert required_turn_radius(0, 1.0) == 0.0
    assert required_turn_radius(2, np.array([0.0, 0.0, 4.0])) == 0.5
    with pytest.raises(ValueError):
        required_turn_radius(-1, 1)


def test_tight_turn_triggers_replan_with_cooldown():
    cfg = ExecConfig(d_trigger=4.5, d_eps=1.0, R_min=2.0, replan_cooldown=10)
    tel = Telemetry(3.0, -0.1, 0.5, required_turn_radius=1.0, speed=2.0)
    ex = ExecState(AVOIDING, 0.0)
    ex, d = update(ex, tel, cfg, DT)
    assert d.replan
    ex = after_replan(ex)
    assert ex.mode == TRACKING and ex.active_waypoint_index == 1 and ex.steps_since_replan == 0
    ex = ExecState(AVOIDING, 0.0, steps_since_replan=ex.steps_since_replan)
    fired = []
    for k in range(1, 15):
        ex, d = update(ex, tel, cfg, DT)
        if d.replan:
            fired.append(k)
            ex = ExecState(AVOIDING, 0.0, steps_since_replan=0)
    assert fired and all(b - a >= 10 for a, b in zip([0] + fired, fired))


def test_stationary_suppresses_replan():
    cfg = ExecConfig(d_trigger=4.5, d_eps=1.0, R_min=2.0)
    _, d = update(ExecState(AVOIDING, 0.0), Telemetry(3.0, -0.1, 0.5, 0.0, speed=0.0), cfg, DT)
    assert not d.replan


def test_waypoint_advance():
    _, d = update(ExecState(), Telemetry(10, 0, 0, dist_to_waypoint=0.4), CFG, DT)
    assert d.advance_waypoint


def test_invalid_inputs():
    with pytest.raises(ValueError):
        ExecState(TRACKING, 0.0)
    with pytest.raises(ValueError):
        ExecState(AVOIDING, -1.0)
    with pytest.raises(ValueError):
        ExecConfig(d_trigger=0.5, d_eps=1.0)
    with pytest.raises(ValueError):
        update(ExecState(), Telemetry(3.0, math.nan, 0.0), CFG, DT)


telemetry = st.builds(
    Telemetry,
    d=st.floats(0.0, 12.0),
    d_rate=st.floats(-3.0, 3.0),
    theta_fix=st.floats(-math.pi, math.pi),
    required_turn_radius=st.floats(0.0, 10.0),
    speed=st.floats(0.0, 4.0),
    dist_to_waypoint=st.floats(0.0, 20.0),
)


@settings(max_examples=200)
@given(st.lists(telemetry, min_size=1, max_size=80))
def test_random_streams_keep_invariants(stream):
    cfg = ExecConfig(d_trigger=4.5, d_eps=1.0, R_min=2.0)
    ex = ExecState()
    last_replan = None
    modes = []
    for k, tel in enumerate(stream):
        prev = ex.mode
        ex, d = update(ex, tel, cfg, DT)
        assert not (d.entered and d.exited)
        assert (ex.mode == TRACKING) == (ex.timer == -1.0)
        if d.entered:
            assert prev == TRACKING and ex.mode == AVOIDING
        if d.exited:
            assert prev == AVOIDING and ex.mode == TRACKING
        if prev == ex.mode:
            assert not (d.entered or d.exited)
        if d.replan:
            if last_replan is not None:
                assert k - last_replan >= cfg.replan_cooldown
            last_replan = k
        modes.append(ex.mode)
    _assert_no_chatter(modes)


def _assert_no_chatter(modes):
    """Avoiding -> Tracking -> Avoiding within two steps may not repeat more than twice in a row."""
    flips = 0
    k = 0
    while k + 2 < len(modes):
        if modes[k] == AVOIDING and modes[k + 1] == TRACKING and AVOIDING in modes[k + 2:k + 3]:
            flips += 1
            assert flips <= 2
            k += 2
        else:
            flips = 0 if modes[k] == TRACKING and modes[k + 1] == TRACKING else flips
            k += 1


def test_timer_blocks_chatter_under_oscillating_heading():
    ex = ExecState()
    modes = []
    for k in range(400):
        th = 0.0 if k % 2 else 0.5
        ex, _ = update(ex, Telemetry(4.0, -0.5, th), CFG, DT)
        modes.append(ex.mode)
    _assert_no_chatter(modes)
    # with K = 1.5 s and dt = 0.05 each episode lasts at least 30 steps
    runs = "".join("A" if m == AVOIDING else "T" for m in modes).split("T")
    assert all(len(r) >= 30 for r in runs[:-1] if r)


def test_replan_helper_and_failure():
    world = PlanningWorld([0, 0], [20, 20])
    path = replan([1, 1], [15, 3], world, lambda s, g, w: plan_path(s, g, w, PlannerConfig(), seed=0))
    assert len(path) == 2
    ring = (Rect([12, 0], 6, 0.5), Rect([12, 0], 0.5, 6), Rect([12, 5.5], 6, 0.5), Rect([17.5, 0], 0.5, 6))
    closed = PlanningWorld([0, 0], [20, 20], ring, 0.1)
    from hybridnav.planner import RrtParams

    cfg = PlannerConfig(rrt=RrtParams(max_iterations=200), rounds=1)
    with pytest.raises(NoPathFound):
        replan([1, 10], [15, 3], closed, lambda s, g, w: plan_path(s, g, w, cfg, seed=0))


def test_reentry_after_exit_needs_closing_threat():
    ex = ExecState(TRACKING, -1.0, inside_after_exit=True)
    ex, d = update(ex, Telemetry(4.0, -0.01, 0.0, speed=4.0), CFG, DT)
    assert not d.entered
    assert exe._closing_fast(Telemetry(1.5, -4.0, 0.0, speed=4.0), CFG)
    ex, d = update(ex, Telemetry(1.5, -4.0, 0.0, speed=4.0), CFG, DT)
    assert d.entered
