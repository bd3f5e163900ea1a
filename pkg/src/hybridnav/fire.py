"""Cellular fire spread on a 3D grid with wind-weighted neighbour heating.

Each burning cell j (temperature above the trigger) heats every one of its
26 neighbours i at rate ``T_j * W_ij * rho`` where
``W_ij = max(0, wind . D_ij + kappa)`` and ``D_ij`` is the unit direction
from j to i. Updates are double-buffered: every step reads the old grid and
returns a fresh one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import OutOfBounds
from .world import DeformableBoundary, TerrainGrid

OFFSETS = tuple(o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0))
FACE_OFFSETS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


@dataclass(frozen=True)
class WindField:
    vector: tuple[float, float, float] = (0.0, 0.0, 0.0)
    intensity_scale: float = 1.0

    @classmethod
    def from_components(cls, comps, intensity_scale: float | None = None) -> "WindField":
        """Accept ``[wx, wy, wz]`` or ``[wx, wy, wz, scale]``."""
        comps = [float(c) for c in comps]
        if len(comps) == 4:
            scale = comps[3] if intensity_scale is None else intensity_scale
            return cls(tuple(comps[:3]), scale)
        if len(comps) == 2:
            comps.append(0.0)
        if len(comps) != 3:
            raise ValueError("wind needs 2, 3 or 4 components")
        return cls(tuple(comps), 1.0 if intensity_scale is None else intensity_scale)

    @property
    def effective(self) -> NDArray[np.float64]:
        return np.asarray(self.vector, dtype=float) * self.intensity_scale


@dataclass(frozen=True, eq=False)
class FireGrid:
    """Temperature field on an (nx, ny, nz) lattice of cubic cells.

    ``origin`` is the lower corner of cell (0, 0, 0). ``burnable`` masks cells
    that can heat up at all (fuel draped over terrain); ``T_cap`` optionally
    saturates temperatures. ``prev_boundary`` and ``last_dt`` carry what the
    boundary-velocity estimate needs from the previous step.
    """

    T: NDArray[np.float64]
    cell_size: float
    T_trigger: float
    kappa_fire: float
    rho: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    burnable: NDArray[np.bool_] | None = None
    T_cap: float | None = None
    ignited_at: float | None = None
    time: float = 0.0
    prev_boundary: NDArray[np.float64] | None = field(default=None, repr=False)
    last_dt: float | None = None

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if T.ndim != 3:
            raise ValueError("T must be a 3D array")
        if np.any(T < 0) or not np.all(np.isfinite(T)):
            raise ValueError("temperatures must be finite and non-negative")
        if self.T_trigger <= 0 or self.kappa_fire < 0 or self.rho < 0 or self.cell_size <= 0:
            raise ValueError("require T_trigger > 0, kappa >= 0, rho >= 0, cell_size > 0")
        object.__setattr__(self, "T", T)
        if self.burnable is not None:
            b = np.asarray(self.burnable, dtype=bool)
            if b.shape != T.shape:
                raise ValueError("burnable mask must match the grid shape")
            object.__setattr__(self, "burnable", b)

    @classmethod
    def empty(cls, dims, cell_size, T_trigger, kappa_fire, rho, origin=(0.0, 0.0, 0.0), **kw) -> "FireGrid":
        return cls(np.zeros(tuple(dims)), cell_size, T_trigger, kappa_fire, rho, tuple(map(float, origin)), **kw)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.T.shape

    @property
    def planar(self) -> bool:
        return self.dims[2] == 1

    @property
    def ignited(self) -> NDArray[np.bool_]:
        return self.T > self.T_trigger

    def cell_center(self, idx) -> NDArray[np.float64]:
        return np.asarray(self.origin) + (np.asarray(idx, dtype=float) + 0.5) * self.cell_size

    def cell_index(self, point: ArrayLike) -> tuple[int, int, int]:
        p = np.asarray(point, dtype=float)
        if p.shape[0] == 2:
            p = np.array([p[0], p[1], self.origin[2]])
        idx = np.floor((p - np.asarray(self.origin)) / self.cell_size).astype(int)
        if self.planar:
            idx[2] = 0
        return tuple(int(i) for i in idx)

    def in_bounds(self, idx) -> bool:
        return all(0 <= int(i) < n for i, n in zip(idx, self.dims))


def ignite(g: FireGrid, cell_index, T0: float, time: float | None = None) -> FireGrid:
    idx = tuple(int(i) for i in cell_index)
    if len(idx) != 3 or not g.in_bounds(idx):
        raise OutOfBounds(f"cell {cell_index} outside grid of dims {g.dims}")
    if T0 <= g.T_trigger:
        raise ValueError("ignition temperature must exceed the trigger")
    T = g.T.copy()
    T[idx] = max(T[idx], T0)
    at = g.ignited_at if g.ignited_at is not None else time
    return replace(g, T=T, ignited_at=at)


def _shift(a: NDArray, o) -> NDArray:
    """out[i] = a[i - o], zero where i - o falls outside the grid."""
    out = np.zeros_like(a)
    src = []
    dst = []
    for k, n in zip(o, a.shape):
        if k >= 0:
            dst.append(slice(k, n))
            src.append(slice(0, n - k))
        else:
            dst.append(slice(0, n + k))
            src.append(slice(-k, n))
    out[tuple(dst)] = a[tuple(src)]
    return out


def heating_rate(g: FireGrid, wind: WindField) -> NDArray[np.float64]:
    """dT/dt for every cell from the burning neighbours."""
    src = np.where(g.ignited, g.T, 0.0)
    rate = np.zeros_like(g.T)
    if not np.any(src):
        return rate
    w = wind.effective
    for o in OFFSETS:
        if g.dims[2] == 1 and o[2] != 0:
            continue
        d = np.asarray(o, dtype=float) / math.sqrt(o[0] ** 2 + o[1] ** 2 + o[2] ** 2)
        W = max(0.0, float(w @ d) + g.kappa_fire)
        if W == 0.0:
            continue
        rate += _shift(src, o) * (W * g.rho)
    if g.burnable is not None:
        rate = np.where(g.burnable, rate, 0.0)
    return rate


def step_fire(g: FireGrid, wind: WindField, dt: float) -> FireGrid:
    if dt <= 0:
        raise ValueError("dt must be positive")
    T = g.T + dt * heating_rate(g, wind)
    if g.T_cap is not None:
        T = np.where(T > g.T_cap, np.maximum(g.T_cap, g.T), T)
    prev = _boundary_cells(g.ignited, g.T.shape)
    prev_pts = np.array([g.cell_center(i) for i in prev]).reshape(-1, 3)
    return replace(g, T=T, time=g.time + dt, prev_boundary=prev_pts, last_dt=dt)


def _boundary_cells(ign: NDArray[np.bool_], shape) -> list[tuple[int, int, int]]:
    if not np.any(ign):
        return []
    exposed = np.zeros_like(ign)
    for o in FACE_OFFSETS:
        if any(k != 0 and n == 1 for k, n in zip(o, shape)):
            # a planar grid has no faces along its singleton axis
            continue
        # neighbour value at i + o; the outside of the grid counts as unburnt
        exposed |= ~_shift(ign, tuple(-k for k in o))
    cells = np.argwhere(ign & exposed)
    return [tuple(int(v) for v in c) for c in cells]


def _outward_normal(ign, idx) -> NDArray[np.float64]:
    n = np.zeros(3)
    for o in FACE_OFFSETS:
        j = tuple(a + b for a, b in zip(idx, o))
        if all(0 <= j[k] < ign.shape[k] for k in range(3)) and not ign[j]:
            n += o
    nn = np.linalg.norm(n)
    return n / nn if nn > 0 else n


def burning_boundary(g: FireGrid, inflation: float = 0.0) -> DeformableBoundary:
    """Boundary cells of the burning region as a deformable obstacle."""
    ign = g.ignited
    cells = _boundary_cells(ign, g.T.shape)
    radius = g.cell_size * (math.sqrt(2.0) if g.planar else math.sqrt(3.0)) / 2.0
    if not cells:
        return DeformableBoundary(np.zeros((0, 3)), np.zeros((0, 3)), radius, planar=g.planar, inflation=inflation)
    pts = np.array([g.cell_center(c) for c in cells])
    vel = np.zeros_like(pts)
    prev = g.prev_boundary
    if prev is not None and len(prev) and g.last_dt:
        for k, c in enumerate(cells):
            n = _outward_normal(ign, c)
            if not np.any(n):
                continue
            q = prev[int(np.argmin(np.linalg.norm(prev - pts[k], axis=1)))]
            speed = max(0.0, float((pts[k] - q) @ n)) / g.last_dt
            vel[k] = speed * n
    region = np.argwhere(ign)
    region_pts = np.asarray(g.origin) + (region + 0.5) * g.cell_size
    return DeformableBoundary(pts, vel, radius, region=region_pts, planar=g.planar, inflation=inflation, name="fire")


def drape_mask(g: FireGrid, terrain: TerrainGrid, depth: float) -> NDArray[np.bool_]:
    """Cells whose centre lies no more than ``depth`` above the ground."""
    nx, ny, nz = g.dims
    ii, jj, kk = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
    c = np.asarray(g.origin) + (np.stack([ii, jj, kk], axis=-1) + 0.5) * g.cell_size
    ground = terrain.heights(c[..., 0].ravel(), c[..., 1].ravel()).reshape(nx, ny, nz)
    return c[..., 2] <= ground + depth


def spread_extent(g: FireGrid, center) -> dict[str, int]:
    """Ignited reach along the four horizontal axis directions from ``center`` (in cells)."""
    ign = g.ignited
    i0, j0, k0 = center
    out = {}
    for name, (di, dj) in {"+x": (1, 0), "-x": (-1, 0), "+y": (0, 1), "-y": (0, -1)}.items():
        n = 0
        i, j = i0 + di, j0 + dj
        while 0 <= i < g.dims[0] and 0 <= j < g.dims[1] and ign[i, j, k0]:
            n += 1
            i += di
            j += dj
        out[name] = n
    return out
