import math

import numpy as np
import pytest

from hybridnav.errors import ObstacleTooFast
from hybridnav.geometry import signed_angle
from hybridnav.reactive import (
    Command,
    ReactiveConfig,
    avoid_2d,
    avoid_3d,
    heading_error,
    track_target,
)
from hybridnav.vehicles import Body3DState, UnicycleState, VehicleLimits, step_unicycle
from hybridnav.world import Disc, SensorReading, Sphere, sense

LIM = VehicleLimits(4.0, 2.0)
CFG = ReactiveConfig(alpha_safe=math.pi / 5, d_eps=1.0)


@pytest.mark.parametrize("theta,u", [(0.0, 0.0), (0.3, 2.0), (-0.3, -2.0)])
def test_track_sign_law(theta, u):
    s = UnicycleState(0, 0, 0)
    target = [10 * math.cos(theta), 10 * math.sin(theta)]
    c = track_target(s, target, LIM, eps_theta=0.0)
    assert c.v == LIM.V_max
    assert c.u == pytest.approx(u) if u else c.u == 0.0


def test_track_rate_saturates_with_dt():
    s = UnicycleState(0, 0, 0)
    c = track_target(s, [10 * math.cos(0.01), 10 * math.sin(0.01)], LIM, dt=0.05, eps_theta=0.0)
    assert c.u == pytest.approx(0.01 / 0.05)


def test_track_3d_turns_toward_target():
    s = Body3DState(np.zeros(3), np.array([1.0, 0, 0]))
    c = track_target(s, [0, 5, 0], LIM)
    assert c.v == 4.0
    np.testing.assert_allclose(c.u, [0, 2, 0])
    assert heading_error(s, [0, 5, 0]) == pytest.approx(math.pi / 2)


def _reading(angles, v_obs=(0, 0, 0), d=3.0):
    return SensorReading(0, d, np.zeros(3), np.asarray(v_obs, dtype=float), angles, np.array([1.0, 0, 0]))


def test_stationary_obstacle_full_speed():
    sol = avoid_2d(UnicycleState(0, 0, 0), _reading((0.4, -0.2)), CFG, LIM)
    assert sol.command.v == pytest.approx(LIM.V_max)


def test_too_fast_obstacle():
    with pytest.raises(ObstacleTooFast):
        avoid_2d(UnicycleState(0, 0, 0), _reading((0.4, -0.2), (4.0, 0, 0)), CFG, LIM)


def test_symmetric_tie_break():
    s = UnicycleState(0, 0, 0)
    assert avoid_2d(s, _reading((0.3, -0.3)), CFG, LIM).side == 1
    cw = ReactiveConfig(alpha_safe=math.pi / 5, d_eps=1.0, side_tiebreak="cw")
    assert avoid_2d(s, _reading((0.3, -0.3)), cw, LIM).side == 2


def test_avoid_2d_equations_by_hand():
    s = UnicycleState(0, 0, 0.1)
    v_o = np.array([0.5, -0.5, 0.0])
    a1, a2 = 0.6, -0.4
    sol = avoid_2d(s, _reading((a1, a2), v_o), CFG, LIM)
    dV = 4.0 - math.hypot(0.5, 0.5)
    cands = []
    for j, beta in ((1, a1 + math.pi / 5), (2, a2 - math.pi / 5)):
        vg = v_o[:2] + dV * np.array([math.cos(beta), math.sin(beta)])
        phi = signed_angle(vg, [math.cos(0.1), math.sin(0.1)])
        cands.append((abs(phi), j, beta, vg, phi))
    _, j, beta, vg, phi = min(cands)
    assert sol.side == j
    assert sol.beta == beta
    np.testing.assert_allclose(sol.v_gamma, vg, atol=1e-12)
    assert sol.command.v == pytest.approx(min(np.linalg.norm(vg), 4.0))
    assert sol.command.u == -2.0 * math.copysign(1, phi)


def test_commands_within_limits_and_argmin_side():
    rng = np.random.default_rng(10)
    for _ in range(10_000):
        s = UnicycleState(0, 0, rng.uniform(-math.pi, math.pi))
        c = rng.uniform(-math.pi, math.pi)
        half = rng.uniform(0.05, 1.4)
        ang = rng.uniform(-math.pi, math.pi)
        v_o = rng.uniform(0, 3.9) * np.array([math.cos(ang), math.sin(ang), 0.0])
        sol = avoid_2d(s, _reading((c + half, c - half), v_o), CFG, LIM, dt=rng.choice([None, 0.05]))
        assert 0 <= sol.command.v <= LIM.V_max + 1e-12
        assert abs(sol.command.u) <= LIM.U_max + 1e-12
        other = avoid_2d(s, _reading((c + half, c - half), v_o), CFG, LIM, side=3 - sol.side)
        assert abs(sol.phi) <= abs(other.phi) + 1e-15


def test_avoid_3d_turn_axis_example():
    s = Body3DState(np.zeros(3), np.array([1.0, 0, 0]))
    r = sense(s.e, s.a, [Sphere([3, 0.5, 0], 1.0)], 10.0)[0]
    sol = avoid_3d(s, r, CFG, LIM)
    u = np.asarray(sol.command.u)
    assert abs(u @ s.a) < 1e-12
    assert np.linalg.norm(u) == pytest.approx(LIM.U_max)


def test_coplanar_3d_equals_2d():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        th = rng.uniform(-math.pi, math.pi)
        p = rng.uniform(-10, 10, 2)
        a2 = np.array([math.cos(th), math.sin(th)])
        off = rng.uniform(-1, 1) * 1.2
        dist = rng.uniform(2.5, 8.0)
        centre = p + dist * np.array([math.cos(th + off), math.sin(th + off)])
        r = rng.uniform(0.3, 1.5)
        v = np.append(rng.normal(size=2) * rng.uniform(0, 1.0), 0.0)
        margin = rng.uniform(0, 1)
        r2 = sense(p, a2, [Disc(centre, r, velocity=v)], 20.0, margin)[0]
        r3 = sense(np.append(p, 0.0), np.append(a2, 0.0), [Sphere(np.append(centre, 0.0), r, velocity=v)], 20.0,
                   margin)[0]
        s2 = UnicycleState(p[0], p[1], th)
        s3 = Body3DState(np.append(p, 0.0), np.append(a2, 0.0))
        sol2 = avoid_2d(s2, r2, CFG, LIM)
        sol3 = avoid_3d(s3, r3, CFG, LIM)
        pl = r3.plane
        assert abs(abs(pl.normal[2]) - 1.0) < 1e-12
        assert sol3.side == sol2.side
        assert sol3.command.v == pytest.approx(sol2.command.v, abs=1e-9)
        np.testing.assert_allclose(sol3.command.u, sol2.command.u * pl.in_plane_y, atol=1e-9)
        # in-plane turn axis lines up with the planar rotation sense
        assert pl.in_plane_y[:2] @ np.array([-a2[1], a2[0]]) * pl.normal[2] > 0
        np.testing.assert_allclose(sol3.v_gamma[:2], sol2.v_gamma, atol=1e-9)
        assert abs(sol3.phi - sol2.phi) < 1e-9
        checked += 1


def test_single_disc_closed_loop_keeps_clearance():
    """Reactive law alone keeps d_eps against one slow disc across random encounters."""
    lim = VehicleLimits(4.0, 2.0)
    worst = math.inf
    for seed in range(200):
        rng = np.random.default_rng(seed)
        r = rng.uniform(0.5, 2.0)
        speed = rng.uniform(0, 1.0)
        heading = rng.uniform(-math.pi, math.pi)
        obs = Disc([15.0, rng.uniform(-1.5, 1.5)], r, velocity=[speed * math.cos(heading), speed * math.sin(heading)])
        s = UnicycleState(0.0, 0.0, 0.0)
        dt = 0.05
        for _ in range(300):
            rd = sense([s.x, s.y], s.heading_vector, [obs], 10.0, CFG.d_eps)
            d = obs.distance([s.x, s.y])[0]
            worst = min(worst, d)
            if rd and d <= 4.5 and _closing(s, obs):
                cmd = avoid_2d(s, rd[0], CFG, lim, dt=dt).command
            else:
                cmd = track_target(s, [40.0, 0.0], lim, dt=dt)
            s = step_unicycle(s, cmd.v, cmd.u, dt, lim)
            obs = obs.translated(obs.velocity * dt)
    assert worst >= CFG.d_eps


def _closing(s, obs):
    rel = obs.center - np.array([s.x, s.y])
    vr = obs.velocity[:2] - s.heading_vector * 4.0
    return float(rel @ vr) < 0


def test_command_type():
    c = Command(1.0, np.zeros(3))
    assert c.v == 1.0
    with pytest.raises(ValueError):
        ReactiveConfig(alpha_safe=2.0)
