import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridnav.errors import LimitViolation, OutOfBounds
from hybridnav.vehicles import (
    Body3DState,
    HeadingAngleState,
    UnicycleState,
    VehicleLimits,
    step_body3d,
    step_heading,
    step_ugv,
    step_unicycle,
)
from hybridnav.world import TerrainGrid, flat_terrain

LIM = VehicleLimits(4.0, 2.0)


def test_r_min_from_table_parameters():
    assert LIM.R_min == 2.0
    assert VehicleLimits(3.0, 0.7).R_min == 3.0 / 0.7


def test_unicycle_examples():
    s = step_unicycle(UnicycleState(0, 0, 0), 1, 0, 0.1, LIM)
    assert (s.x, s.y, s.theta) == (0.1, 0.0, 0.0)
    s = step_unicycle(UnicycleState(0, 0, 0), 2, 1, 0.05, LIM)
    assert (s.x, s.y, s.theta) == pytest.approx((0.1, 0.0, 0.05), abs=1e-15)


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-3, 3))
def test_zero_command_is_identity(x, y, th):
    s = UnicycleState(x, y, th)
    assert step_unicycle(s, 0, 0, 0.05, LIM) == s
    b = Body3DState(np.array([x, y, 1.0]), np.array([0.0, 0.6, 0.8]))
    b2 = step_body3d(b, 0, np.zeros(3), 0.05, LIM)
    np.testing.assert_array_equal(b2.e, b.e)
    np.testing.assert_allclose(b2.a, b.a, atol=1e-15)
    h = HeadingAngleState(np.array([x, y, 0.0]), 0.2, th)
    h2 = step_heading(h, 0, 0, 0, 0.05, LIM)
    np.testing.assert_array_equal(h2.p, h.p)
    assert (h2.alpha, h2.beta) == (h.alpha, h.beta)
    t = flat_terrain((-60, 60), (-60, 60), z=2.0)
    g, z = step_ugv(s, 0, 0, 0.05, t, LIM)
    assert g == s and z == 2.0


def test_limits_are_enforced():
    with pytest.raises(LimitViolation):
        step_unicycle(UnicycleState(0, 0, 0), 4.5, 0, 0.1, LIM)
    with pytest.raises(LimitViolation):
        step_unicycle(UnicycleState(0, 0, 0), -1, 0, 0.1, LIM)
    with pytest.raises(LimitViolation):
        step_body3d(Body3DState(np.zeros(3), np.array([1.0, 0, 0])), 1, [0, 3, 0], 0.1, LIM)
    with pytest.raises(LimitViolation):
        step_heading(HeadingAngleState(np.zeros(3), 0, 0), 1, 2.5, 0, 0.1, LIM)


def test_reverse_allowed_when_configured():
    s = step_unicycle(UnicycleState(0, 0, 0), -1, 0, 1.0, VehicleLimits(4, 2, allow_reverse=True))
    assert s.x == -1.0


def test_body3d_norm_preserved_over_many_random_steps():
    rng = np.random.default_rng(5)
    s = Body3DState(np.zeros(3), np.array([1.0, 0.0, 0.0]))
    worst = 0.0
    us = rng.normal(size=(100_000, 3))
    us *= (rng.random((100_000, 1)) * LIM.U_max) / np.linalg.norm(us, axis=1, keepdims=True)
    for u in us:
        s = step_body3d(s, 1.0, u, 0.05, LIM)
        worst = max(worst, abs(np.linalg.norm(s.a) - 1.0))
    assert worst <= 1e-9


def test_body3d_small_angle_tilt_and_parallel_rate():
    w, dt = 1.5, 1e-3
    s = step_body3d(Body3DState(np.zeros(3), np.array([1.0, 0, 0])), 1, [0, w, 0], dt, LIM)
    assert math.atan2(s.a[1], s.a[0]) == pytest.approx(w * dt, abs=(w * dt) ** 2)
    s = step_body3d(Body3DState(np.zeros(3), np.array([1.0, 0, 0])), 2, [1.9, 0, 0], 0.5, LIM)
    np.testing.assert_array_equal(s.a, [1.0, 0, 0])
    np.testing.assert_array_equal(s.e, [1.0, 0, 0])


def test_heading_examples():
    p0 = np.array([1.0, 2.0, 3.0])
    s = step_heading(HeadingAngleState(p0, 0, 0), 1, 0, 0, 1, LIM)
    np.testing.assert_allclose(s.p - p0, [1, 0, 0], atol=1e-15)
    s = step_heading(HeadingAngleState(p0, math.pi / 2, 0), 1, 0, 0, 1, LIM)
    np.testing.assert_allclose(s.p - p0, [0, 0, 1], atol=1e-15)
    a, b, v, dt = math.pi / 6, math.pi / 3, 2.0, 0.5
    s = step_heading(HeadingAngleState(p0, a, b), v, 0, 0, dt, LIM)
    expected = [v * math.cos(b) * math.cos(a) * dt, v * math.sin(b) * math.cos(a) * dt, v * math.sin(a) * dt]
    np.testing.assert_allclose(s.p - p0, expected, atol=1e-15)


def test_heading_alpha_clamped():
    s = step_heading(HeadingAngleState(np.zeros(3), 1.5, 0), 1, 2, 0, 0.1, LIM)
    assert s.alpha == math.pi / 2


def _arc_radius(dt, v=1.0, u=0.5, T=2 * math.pi / 0.5):
    s = UnicycleState(0, 0, 0)
    pts = [(0.0, 0.0)]
    for _ in range(int(round(T / dt))):
        s = step_unicycle(s, v, u, dt, LIM)
        pts.append((s.x, s.y))
    pts = np.array(pts)
    # least-squares circle fit (Kasa)
    A = np.column_stack([2 * pts, np.ones(len(pts))])
    b = np.sum(pts**2, axis=1)
    cx, cy, c = np.linalg.lstsq(A, b, rcond=None)[0]
    return math.sqrt(c + cx**2 + cy**2)


def test_discrete_arc_radius_converges():
    errs = [abs(_arc_radius(dt) - 1.0 / 0.5) for dt in (0.1, 0.01, 0.001)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_ugv_on_ramp_and_out_of_bounds():
    xs = np.arange(6, dtype=float)
    ramp = TerrainGrid((0.0, 0.0), 1.0, np.tile(xs, (6, 1)))
    s, z = step_ugv(UnicycleState(2.0, 2.0, 0.0), 1.0, 0.0, 0.5, ramp, LIM)
    assert s.x == 2.5 and z == pytest.approx(2.5, abs=1e-12)
    flat = flat_terrain((0, 5), (0, 5))
    _, z = step_ugv(UnicycleState(1, 1, 0.3), 1, 0.2, 0.1, flat, LIM)
    assert z == 0.0
    with pytest.raises(OutOfBounds):
        step_ugv(UnicycleState(4.9, 1, 0), 2, 0, 0.1, flat, LIM)
