import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridnav.errors import OutOfBounds
from hybridnav.fire import (
    FireGrid,
    WindField,
    burning_boundary,
    drape_mask,
    heating_rate,
    ignite,
    spread_extent,
    step_fire,
)
from hybridnav.world import TerrainGrid, flat_terrain


def _oracle_increment(T, T_trigger, kappa, rho, wind, dt):
    """Direct double loop over cells and their 26 neighbours."""
    nx, ny, nz = T.shape
    out = np.zeros_like(T)
    w = np.asarray(wind, dtype=float)
    for i, j, k in itertools.product(range(nx), range(ny), range(nz)):
        total = 0.0
        for di, dj, dk in itertools.product((-1, 0, 1), repeat=3):
            if (di, dj, dk) == (0, 0, 0):
                continue
            a, b, c = i - di, j - dj, k - dk  # source j sits at i - offset
            if not (0 <= a < nx and 0 <= b < ny and 0 <= c < nz):
                continue
            Tj = T[a, b, c]
            if Tj <= T_trigger:
                continue
            D = np.array([di, dj, dk]) / math.sqrt(di * di + dj * dj + dk * dk)
            W = max(0.0, float(w @ D) + kappa)
            total += Tj * W * rho
        out[i, j, k] = dt * total
    return out


def _center_grid(dims=(3, 3, 3), kappa=0.05):
    g = FireGrid.empty(dims, 1.0, 50.0, kappa, 1.0)
    return ignite(g, tuple(d // 2 for d in dims), 100.0)


def test_windless_neighbour_increment():
    g = _center_grid()
    g2 = step_fire(g, WindField(), 0.1)
    dT = g2.T - g.T
    for idx in itertools.product(range(3), repeat=3):
        expected = 0.0 if idx == (1, 1, 1) else 0.5
        assert abs(dT[idx] - expected) <= 1e-12
    assert np.max(np.abs(dT - _oracle_increment(g.T, 50.0, 0.05, 1.0, [0, 0, 0], 0.1))) <= 1e-12


def test_wind_aligned_neighbour_increment():
    g = _center_grid()
    g2 = step_fire(g, WindField((1.0, 0.0, 0.0)), 0.1)
    dT = g2.T - g.T
    assert abs(dT[2, 1, 1] - 10.5) <= 1e-12
    assert dT[0, 1, 1] == 0.0
    assert abs(dT[1, 2, 1] - 0.5) <= 1e-12
    oracle = _oracle_increment(g.T, 50.0, 0.05, 1.0, [1, 0, 0], 0.1)
    assert np.max(np.abs(dT - oracle)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(
    st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)),
    st.floats(0, 0.5),
    st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2)), min_size=1, max_size=4),
)
def test_increment_matches_oracle_on_random_fixtures(wind, kappa, cells):
    g = FireGrid.empty((4, 4, 3), 1.0, 50.0, kappa, 0.7)
    for n, c in enumerate(cells):
        g = ignite(g, c, 60.0 + 10 * n)
    g2 = step_fire(g, WindField(wind), 0.25)
    oracle = _oracle_increment(g.T, 50.0, kappa, 0.7, wind, 0.25)
    assert np.max(np.abs(g2.T - g.T - oracle)) <= 1e-12


def test_cold_grid_unchanged():
    g = FireGrid(np.full((4, 4, 1), 10.0), 1.0, 50.0, 0.1, 1.0)
    g2 = step_fire(g, WindField((3, 0, 0)), 1.0)
    np.testing.assert_array_equal(g2.T, g.T)
    assert g2 is not g


def test_step_is_double_buffered():
    g = _center_grid()
    before = g.T.copy()
    step_fire(g, WindField(), 1.0)
    np.testing.assert_array_equal(g.T, before)


def test_temperature_monotone():
    rng = np.random.default_rng(2)
    g = FireGrid(rng.uniform(0, 120, (6, 6, 2)), 1.0, 50.0, 0.1, 0.3)
    for _ in range(10):
        g2 = step_fire(g, WindField(tuple(rng.normal(size=3))), 0.5)
        assert np.all(g2.T >= g.T)
        g = g2


def _extent_run(wind, steps=50, n=61, kappa=0.05):
    g = FireGrid.empty((n, n, 1), 1.0, 50.0, kappa, 1.0)
    c = (n // 2, n // 2, 0)
    g = ignite(g, c, 100.0)
    out = []
    for _ in range(steps):
        g = step_fire(g, WindField(wind), 1.0)
        out.append(spread_extent(g, c))
    return out


def test_windless_spread_is_isotropic():
    ext = _extent_run((0, 0, 0))
    last = ext[-1]
    assert last["+x"] > 0
    for e in ext:
        vals = list(e.values())
        assert max(vals) - min(vals) <= 1


def test_downwind_exceeds_upwind_every_step():
    ext = _extent_run((1, 0, 0), steps=25)
    for e in ext:
        assert e["+x"] > e["-x"]


def test_ignite_rules():
    g = FireGrid.empty((5, 5, 1), 1.0, 50.0, 0.1, 1.0)
    g1 = ignite(g, (2, 2, 0), 80.0)
    assert int(g1.ignited.sum()) == 1
    assert ignite(ignite(g, (2, 2, 0), 80.0), (2, 2, 0), 120.0).T[2, 2, 0] == 120.0
    assert ignite(ignite(g, (2, 2, 0), 120.0), (2, 2, 0), 80.0).T[2, 2, 0] == 120.0
    with pytest.raises(OutOfBounds):
        ignite(g, (5, 0, 0), 80.0)
    with pytest.raises(ValueError):
        ignite(g, (1, 1, 0), 40.0)


def test_boundary_examples():
    g = FireGrid.empty((5, 5, 1), 1.0, 50.0, 0.1, 1.0)
    assert burning_boundary(g).empty
    one = burning_boundary(ignite(g, (2, 2, 0), 80.0))
    np.testing.assert_allclose(one.points, [[2.5, 2.5, 0.5]])
    T = np.zeros((5, 5, 1))
    T[1:4, 1:4, 0] = 80.0
    b = burning_boundary(FireGrid(T, 1.0, 50.0, 0.1, 1.0))
    assert len(b.points) == 8
    assert not any(np.allclose(p[:2], [2.5, 2.5]) for p in b.points)


def test_boundary_velocity_points_outward():
    g = FireGrid.empty((21, 21, 1), 1.0, 50.0, 0.2, 1.0)
    g = ignite(g, (10, 10, 0), 100.0)
    for _ in range(40):
        n = int(g.ignited.sum())
        g = step_fire(g, WindField(), 1.0)
        if n > 1 and g.ignited.sum() > n:
            break
    b = burning_boundary(g)
    centre = np.array([10.5, 10.5])
    moving = np.linalg.norm(b.surface_velocities, axis=1) > 0
    assert moving.any()
    for p, v in zip(b.points[moving], b.surface_velocities[moving]):
        assert float((p[:2] - centre) @ v[:2]) > 0


def test_drape_mask_follows_terrain():
    t = TerrainGrid((0.0, 0.0), 1.0, np.tile(np.arange(5, dtype=float), (5, 1)))
    g = FireGrid.empty((4, 4, 6), 1.0, 50.0, 0.1, 1.0)
    m = drape_mask(g, t, 1.0)
    # column at x = 0.5 has ground 0.5, so cells with centre z <= 1.5 burn
    assert m[0, 0].tolist() == [True, True, False, False, False, False]
    assert m[3, 0].tolist() == [True, True, True, True, True, False]
    flat = drape_mask(g, flat_terrain((0, 4), (0, 4)), 2.0)
    assert flat[:, :, :2].all() and not flat[:, :, 2:].any()


def test_unburnable_cells_never_heat():
    g = _center_grid((5, 5, 1))
    mask = np.ones(g.dims, dtype=bool)
    mask[3, 2, 0] = False
    g = FireGrid(g.T, 1.0, 50.0, 0.05, 1.0, burnable=mask)
    assert heating_rate(g, WindField((1, 0, 0)))[3, 2, 0] == 0.0


def test_wind_components():
    w = WindField.from_components([-8, -8, 0, 1])
    np.testing.assert_array_equal(w.effective, [-8, -8, 0])
    assert WindField.from_components([1, 2], intensity_scale=0.5).effective.tolist() == [0.5, 1.0, 0.0]
    with pytest.raises(ValueError):
        WindField.from_components([1])
