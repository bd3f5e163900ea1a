"""Terrain grid, obstacle geometry and the ideal range sensor.

Disc, Rect and Segment are planar shapes extruded vertically without bound,
so their distance ignores z. Sphere and Cylinder are solid 3D bodies.
A DeformableBoundary is a cloud of burning cells produced by the fire model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree

from .errors import OutOfBounds
from .geometry import AvoidancePlane, avoidance_plane, normalize, vertical_plane, wrap_angle

Array = NDArray[np.float64]


def vec3(p: ArrayLike) -> Array:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] == 2:
        return np.array([p[0], p[1], 0.0])
    if p.shape[0] != 3:
        raise ValueError(f"expected 2 or 3 components, got {p.shape[0]}")
    return p.copy()


# ---------------------------------------------------------------- terrain


@dataclass(frozen=True, eq=False)
class TerrainGrid:
    """Elevation samples on a regular node lattice.

    ``elevation[r, c]`` is the height at ``(origin_x + c*cell, origin_y + r*cell)``;
    row 0 is the southern row. Between nodes heights are bilinear.
    """

    origin: tuple[float, float]
    cell_size: float
    elevation: NDArray[np.float64]

    def __post_init__(self):
        e = np.asarray(self.elevation, dtype=float)
        if e.ndim != 2 or min(e.shape) < 2:
            raise ValueError("elevation must be a 2D array with at least 2x2 nodes")
        if not np.all(np.isfinite(e)):
            raise ValueError("elevation values must be finite")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "elevation", e)

    @property
    def n_rows(self) -> int:
        return self.elevation.shape[0]

    @property
    def n_cols(self) -> int:
        return self.elevation.shape[1]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return (x0, x0 + (self.n_cols - 1) * self.cell_size, y0, y0 + (self.n_rows - 1) * self.cell_size)

    def contains(self, x: float, y: float) -> bool:
        x0, x1, y0, y1 = self.extent
        eps = 1e-9 * self.cell_size
        return x0 - eps <= x <= x1 + eps and y0 - eps <= y <= y1 + eps

    def height(self, x: float, y: float) -> float:
        if not self.contains(x, y):
            raise OutOfBounds(f"({x:.3f}, {y:.3f}) outside terrain extent {self.extent}")
        return float(self.heights(np.array([x]), np.array([y]))[0])

    def heights(self, xs: ArrayLike, ys: ArrayLike) -> Array:
        """Vectorised bilinear lookup; points outside are clamped to the edge."""
        fx = (np.asarray(xs, dtype=float) - self.origin[0]) / self.cell_size
        fy = (np.asarray(ys, dtype=float) - self.origin[1]) / self.cell_size
        fx = np.clip(fx, 0.0, self.n_cols - 1)
        fy = np.clip(fy, 0.0, self.n_rows - 1)
        c0 = np.minimum(np.floor(fx).astype(int), self.n_cols - 2)
        r0 = np.minimum(np.floor(fy).astype(int), self.n_rows - 2)
        tx = fx - c0
        ty = fy - r0
        e = self.elevation
        # lerp form keeps constant patches exact
        lo = e[r0, c0] + (e[r0, c0 + 1] - e[r0, c0]) * tx
        hi = e[r0 + 1, c0] + (e[r0 + 1, c0 + 1] - e[r0 + 1, c0]) * tx
        return lo + (hi - lo) * ty

    def nodes(self) -> Array:
        """All lattice nodes as an (N, 3) array."""
        x0, y0 = self.origin
        cs = self.cell_size
        rr, cc = np.meshgrid(np.arange(self.n_rows), np.arange(self.n_cols), indexing="ij")
        return np.column_stack([x0 + cc.ravel() * cs, y0 + rr.ravel() * cs, self.elevation.ravel()])


def terrain_height(t: TerrainGrid, x: float, y: float) -> float:
    return t.height(x, y)


def flat_terrain(x_range, y_range, cell_size: float = 1.0, z: float = 0.0) -> TerrainGrid:
    nx = int(round((x_range[1] - x_range[0]) / cell_size)) + 1
    ny = int(round((y_range[1] - y_range[0]) / cell_size)) + 1
    return TerrainGrid((float(x_range[0]), float(y_range[0])), cell_size, np.full((ny, nx), float(z)))


def parse_ascii_grid(text: str) -> TerrainGrid:
    """Parse an ESRI-style ASCII grid. The first data row is the northern edge."""
    header: dict[str, float] = {}
    lines = [ln for ln in text.splitlines() if ln.strip()]
    i = 0
    keys = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"}
    while i < len(lines):
        parts = lines[i].split()
        if parts[0].lower() not in keys:
            break
        header[parts[0].lower()] = float(parts[1])
        i += 1
    for k in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if k not in header:
            raise ValueError(f"ASCII grid header missing '{k}'")
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    rows = [[float(v) for v in ln.split()] for ln in lines[i:]]
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise ValueError(f"ASCII grid body must be {nrows} rows of {ncols} values")
    elev = np.array(rows[::-1])
    return TerrainGrid((header["xllcorner"], header["yllcorner"]), header["cellsize"], elev)


def load_ascii_grid(path: str | Path) -> TerrainGrid:
    return parse_ascii_grid(Path(path).read_text())


def format_ascii_grid(t: TerrainGrid) -> str:
    out = [
        f"ncols {t.n_cols}",
        f"nrows {t.n_rows}",
        f"xllcorner {t.origin[0]:.9g}",
        f"yllcorner {t.origin[1]:.9g}",
        f"cellsize {t.cell_size:.9g}",
    ]
    for row in t.elevation[::-1]:
        out.append(" ".join(f"{v:.9g}" for v in row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- obstacles


@dataclass(frozen=True, eq=False)
class Obstacle:
    """Common fields. ``known`` marks obstacles available to the global planner."""

    velocity: Array = field(default_factory=lambda: np.zeros(3), kw_only=True)
    name: str = field(default="", kw_only=True)
    known: bool = field(default=True, kw_only=True)

    def __post_init__(self):
        object.__setattr__(self, "velocity", vec3(self.velocity))

    @property
    def moving(self) -> bool:
        return bool(np.any(self.velocity != 0.0))

    def distances(self, pts: Array) -> Array:
        raise NotImplementedError

    def distance(self, p: ArrayLike) -> tuple[float, Array]:
        raise NotImplementedError

    def translated(self, delta: Array) -> "Obstacle":
        raise NotImplementedError

    def surface_velocity(self, nearest: Array) -> Array:
        return self.velocity

    def silhouette(self, p: Array, margin: float, r_sensor: float, planar: bool) -> tuple[Array, Array]:
        """Discs (planar) or spheres covering the visible, margin-inflated shape."""
        raise NotImplementedError


def _as_pts(pts: ArrayLike) -> Array:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    return pts


@dataclass(frozen=True, eq=False)
class Disc(Obstacle):
    center: Array
    radius: float

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float)[:2].copy())
        if self.radius <= 0:
            raise ValueError("Disc radius must be positive")

    def distances(self, pts):
        pts = _as_pts(pts)
        return np.maximum(np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1]) - self.radius, 0.0)

    def distance(self, p):
        p = vec3(p)
        off = p[:2] - self.center
        rho = float(np.hypot(off[0], off[1]))
        if rho <= self.radius:
            return 0.0, p
        q = self.center + off * (self.radius / rho)
        return rho - self.radius, np.array([q[0], q[1], p[2]])

    def translated(self, delta):
        return replace(self, center=self.center + delta[:2])

    def silhouette(self, p, margin, r_sensor, planar):
        c = np.array([[self.center[0], self.center[1], p[2]]])
        return c, np.array([self.radius + margin])


@dataclass(frozen=True, eq=False)
class Rect(Obstacle):
    """Axis-aligned rectangle with lower-left ``corner``, width ``w`` and height ``h``."""

    corner: Array
    w: float
    h: float

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "corner", np.asarray(self.corner, dtype=float)[:2].copy())
        if self.w <= 0 or self.h <= 0:
            raise ValueError("Rect extents must be positive")

    @property
    def hi(self) -> Array:
        return self.corner + np.array([self.w, self.h])

    def distances(self, pts):
        pts = _as_pts(pts)
        lo, hi = self.corner, self.hi
        dx = np.maximum(np.maximum(lo[0] - pts[:, 0], pts[:, 0] - hi[0]), 0.0)
        dy = np.maximum(np.maximum(lo[1] - pts[:, 1], pts[:, 1] - hi[1]), 0.0)
        return np.hypot(dx, dy)

    def distance(self, p):
        p = vec3(p)
        q = np.clip(p[:2], self.corner, self.hi)
        d = float(np.hypot(*(p[:2] - q)))
        return d, np.array([q[0], q[1], p[2]])

    def translated(self, delta):
        return replace(self, corner=self.corner + delta[:2])

    def edges(self) -> list[tuple[Array, Array]]:
        lo, hi = self.corner, self.hi
        c = [lo, np.array([hi[0], lo[1]]), hi, np.array([lo[0], hi[1]])]
        return [(c[i], c[(i + 1) % 4]) for i in range(4)]

    def silhouette(self, p, margin, r_sensor, planar):
        pts = []
        for a, b in self.edges():
            clipped = _clip_segment_to_disc(a, b, p[:2], r_sensor)
            if clipped is not None:
                pts.extend(clipped)
        if not pts:
            _, q = self.distance(p)
            pts = [q[:2]]
        pts = np.array(pts)
        return np.column_stack([pts, np.full(len(pts), p[2])]), np.full(len(pts), margin)


@dataclass(frozen=True, eq=False)
class Segment(Obstacle):
    p0: Array
    p1: Array

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "p0", np.asarray(self.p0, dtype=float)[:2].copy())
        object.__setattr__(self, "p1", np.asarray(self.p1, dtype=float)[:2].copy())
        if np.linalg.norm(self.p1 - self.p0) <= 0:
            raise ValueError("Segment endpoints must differ")

    def _project(self, xy: Array) -> Array:
        d = self.p1 - self.p0
        t = np.clip(((xy - self.p0) @ d) / (d @ d), 0.0, 1.0)
        return self.p0 + np.multiply.outer(t, d)

    def distances(self, pts):
        pts = _as_pts(pts)
        q = self._project(pts[:, :2])
        return np.hypot(pts[:, 0] - q[:, 0], pts[:, 1] - q[:, 1])

    def distance(self, p):
        p = vec3(p)
        q = self._project(p[:2])
        return float(np.hypot(*(p[:2] - q))), np.array([q[0], q[1], p[2]])

    def translated(self, delta):
        return replace(self, p0=self.p0 + delta[:2], p1=self.p1 + delta[:2])

    def silhouette(self, p, margin, r_sensor, planar):
        clipped = _clip_segment_to_disc(self.p0, self.p1, p[:2], r_sensor)
        if clipped is None:
            _, q = self.distance(p)
            clipped = [q[:2]]
        pts = np.array(clipped)
        return np.column_stack([pts, np.full(len(pts), p[2])]), np.full(len(pts), margin)


@dataclass(frozen=True, eq=False)
class Sphere(Obstacle):
    center: Array
    radius: float

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "center", vec3(self.center))
        if self.radius <= 0:
            raise ValueError("Sphere radius must be positive")

    def distances(self, pts):
        pts = _as_pts(pts)
        return np.maximum(np.linalg.norm(pts - self.center, axis=1) - self.radius, 0.0)

    def distance(self, p):
        p = vec3(p)
        off = p - self.center
        n = float(np.linalg.norm(off))
        if n <= self.radius:
            return 0.0, p
        return n - self.radius, self.center + off * (self.radius / n)

    def translated(self, delta):
        return replace(self, center=self.center + delta)

    def silhouette(self, p, margin, r_sensor, planar):
        c = self.center.copy()
        if planar:
            c[2] = p[2]
        return c[None, :], np.array([self.radius + margin])


@dataclass(frozen=True, eq=False)
class Cylinder(Obstacle):
    """Solid vertical cylinder standing on ``base_center``."""

    base_center: Array
    radius: float
    height: float

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "base_center", vec3(self.base_center))
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("Cylinder radius and height must be positive")

    def distances(self, pts):
        pts = _as_pts(pts)
        rho = np.hypot(pts[:, 0] - self.base_center[0], pts[:, 1] - self.base_center[1])
        dr = np.maximum(rho - self.radius, 0.0)
        z0 = self.base_center[2]
        dz = np.maximum(np.maximum(z0 - pts[:, 2], pts[:, 2] - (z0 + self.height)), 0.0)
        return np.hypot(dr, dz)

    def distance(self, p):
        p = vec3(p)
        off = p[:2] - self.base_center[:2]
        rho = float(np.hypot(*off))
        if rho > self.radius:
            qxy = self.base_center[:2] + off * (self.radius / rho)
        else:
            qxy = p[:2]
        z0 = self.base_center[2]
        qz = min(max(p[2], z0), z0 + self.height)
        q = np.array([qxy[0], qxy[1], qz])
        return float(np.linalg.norm(p - q)), (p if np.array_equal(q, p) else q)

    def translated(self, delta):
        return replace(self, base_center=self.base_center + delta)

    def silhouette(self, p, margin, r_sensor, planar):
        c = self.base_center
        if planar:
            return np.array([[c[0], c[1], p[2]]]), np.array([self.radius + margin])
        # stack of spheres along the axis; radius chosen so every horizontal
        # cross-section is at least the inflated disc
        r = self.radius + margin
        spacing = 0.5 * r
        lo = max(c[2] - margin, p[2] - r_sensor - r)
        hi = min(c[2] + self.height + margin, p[2] + r_sensor + r)
        if hi < lo:
            hi = lo
        n = int(math.ceil((hi - lo) / spacing)) + 1
        zs = np.linspace(lo, hi, n)
        rad = math.hypot(r, 0.5 * (zs[1] - zs[0]) if n > 1 else 0.0)
        centers = np.column_stack([np.full(n, c[0]), np.full(n, c[1]), zs])
        return centers, np.full(n, rad)


@dataclass(frozen=True, eq=False)
class DeformableBoundary(Obstacle):
    """Burning region given by cell centres.

    ``points``/``surface_velocities`` describe the boundary cells. ``region``
    holds every burning cell centre and is used for distances; each cell is
    treated as a ball of ``cell_radius`` (half the cell diagonal).
    """

    points: Array
    surface_velocities: Array
    cell_radius: float = 0.0
    region: Array | None = None
    planar: bool = False
    inflation: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        vel = np.asarray(self.surface_velocities, dtype=float).reshape(-1, 3)
        if len(pts) != len(vel):
            raise ValueError("one surface velocity per boundary point required")
        region = pts if self.region is None else np.asarray(self.region, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "surface_velocities", vel)
        object.__setattr__(self, "region", region)
        object.__setattr__(self, "_tree", cKDTree(self._proj(region)) if len(region) else None)
        object.__setattr__(self, "_btree", cKDTree(self._proj(pts)) if len(pts) else None)

    def _proj(self, pts: Array) -> Array:
        return pts[:, :2] if self.planar else pts

    @property
    def empty(self) -> bool:
        return len(self.region) == 0

    @property
    def pad(self) -> float:
        return self.cell_radius + self.inflation

    def distances(self, pts):
        pts = _as_pts(pts)
        if self._tree is None:
            return np.full(len(pts), np.inf)
        d, _ = self._tree.query(self._proj(pts))
        return np.maximum(d - self.pad, 0.0)

    def distance(self, p):
        p = vec3(p)
        if self._tree is None:
            return math.inf, p
        d, i = self._tree.query(self._proj(p[None, :]))
        c = self.region[int(i[0])].copy()
        if self.planar:
            c[2] = p[2]
        off = p - c
        n = float(np.linalg.norm(off))
        if n <= self.pad:
            return 0.0, p
        return n - self.pad, c + off * (self.pad / n)

    def surface_velocity(self, nearest):
        if self._btree is None:
            return np.zeros(3)
        _, i = self._btree.query(self._proj(vec3(nearest)[None, :]))
        return self.surface_velocities[int(i[0])].copy()

    def translated(self, delta):
        return self

    def silhouette(self, p, margin, r_sensor, planar):
        pts = self.points
        if len(pts) == 0:
            return np.zeros((0, 3)), np.zeros(0)
        proj = self._proj(pts)
        dist = np.linalg.norm(proj - self._proj(p[None, :]), axis=1)
        keep = dist <= r_sensor + self.pad
        if not np.any(keep):
            keep = dist <= dist.min()
        c = pts[keep].copy()
        if self.planar or planar:
            c[:, 2] = p[2]
        return c, np.full(len(c), self.pad + margin)


@dataclass(frozen=True, eq=False)
class TerrainObstacle(Obstacle):
    """The ground surface seen as an obstacle (used by aerial agents)."""

    terrain: TerrainGrid = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "_nodes", self.terrain.nodes())

    def _local_nodes(self, p: Array, radius: float) -> Array:
        t = self.terrain
        x0, y0 = t.origin
        cs = t.cell_size
        c_lo = max(int(math.floor((p[0] - radius - x0) / cs)), 0)
        c_hi = min(int(math.ceil((p[0] + radius - x0) / cs)), t.n_cols - 1)
        r_lo = max(int(math.floor((p[1] - radius - y0) / cs)), 0)
        r_hi = min(int(math.ceil((p[1] + radius - y0) / cs)), t.n_rows - 1)
        if c_hi < c_lo or r_hi < r_lo:
            return np.zeros((0, 3))
        rr, cc = np.meshgrid(np.arange(r_lo, r_hi + 1), np.arange(c_lo, c_hi + 1), indexing="ij")
        return np.column_stack([x0 + cc.ravel() * cs, y0 + rr.ravel() * cs, t.elevation[rr, cc].ravel()])

    def distances(self, pts):
        pts = _as_pts(pts)
        below = pts[:, 2] - self.terrain.heights(pts[:, 0], pts[:, 1])
        return np.maximum(below, 0.0)

    def distance(self, p):
        p = vec3(p)
        ground = self.terrain.heights(np.array([p[0]]), np.array([p[1]]))[0]
        if p[2] <= ground:
            return 0.0, p
        best_d = p[2] - ground
        best_q = np.array([p[0], p[1], ground])
        nodes = self._local_nodes(p, best_d)
        if len(nodes):
            d = np.linalg.norm(nodes - p, axis=1)
            i = int(np.argmin(d))
            if d[i] < best_d:
                best_d, best_q = float(d[i]), nodes[i]
        return float(best_d), best_q

    def translated(self, delta):
        return self

    def silhouette(self, p, margin, r_sensor, planar):
        nodes = self._local_nodes(p, r_sensor)
        if len(nodes):
            nodes = nodes[np.linalg.norm(nodes - p, axis=1) <= r_sensor]
        if len(nodes) == 0:
            _, q = self.distance(p)
            nodes = q[None, :]
        return nodes, np.full(len(nodes), margin + 0.5 * self.terrain.cell_size)


def distance_to(p: ArrayLike, o: Obstacle) -> tuple[float, Array]:
    return o.distance(p)


def advance_obstacles(obstacles: Sequence[Obstacle], dt: float) -> list[Obstacle]:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return [o.translated(o.velocity * dt) if o.moving else o for o in obstacles]


def min_clearance(p: ArrayLike, obstacles: Iterable[Obstacle]) -> float:
    best = math.inf
    pts = vec3(p)[None, :]
    for o in obstacles:
        best = min(best, float(o.distances(pts)[0]))
    return best


# ---------------------------------------------------------------- sensing


@dataclass(frozen=True, eq=False)
class SensorReading:
    """Instantaneous geometry of one obstacle seen from the agent.

    ``observation_angles`` are (ccw edge, cw edge). For planar readings they
    are world-frame angles; otherwise they are angles in ``plane`` measured
    from its ``in_plane_x`` axis. ``allowed_sides`` restricts which edge the
    avoidance law may pass (the ground can only be passed above).
    """

    obstacle_index: int
    distance: float
    nearest_point: Array
    surface_velocity: Array
    observation_angles: tuple[float, float]
    tangent: Array
    aux_points: tuple = ()
    planar: bool = True
    plane: AvoidancePlane | None = None
    allowed_sides: tuple[int, ...] = (1, 2)
    distance_rate: float = 0.0


def _clip_segment_to_disc(a: Array, b: Array, c: Array, r: float):
    """Portion of segment ab inside the disc (c, r) as its two endpoints, or None."""
    d = b - a
    f = a - c
    A = float(d @ d)
    B = 2.0 * float(f @ d)
    C = float(f @ f) - r * r
    disc = B * B - 4 * A * C
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    t0 = max((-B - sq) / (2 * A), 0.0)
    t1 = min((-B + sq) / (2 * A), 1.0)
    if t0 > t1:
        return None
    return [a + t0 * d, a + t1 * d]


def angular_extent(
    origin2: Array, ref_angle: float, centers2: Array, radii: Array
) -> tuple[float, float]:
    """CCW and CW silhouette edges of a union of discs seen from ``origin2``.

    Returned as absolute angles ``ref + offset`` with offsets measured from
    ``ref_angle`` and unwrapped (so the ccw edge may exceed pi).
    """
    off = centers2 - origin2
    dist = np.hypot(off[:, 0], off[:, 1])
    psi = np.arctan2(off[:, 1], off[:, 0])
    delta = np.remainder(psi - ref_angle + np.pi, 2 * np.pi) - np.pi
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0, radii / np.where(dist > 0, dist, 1.0), 2.0)
    half = np.where(ratio >= 1.0, np.pi / 2, np.arcsin(np.minimum(ratio, 1.0)))
    hi = float(np.max(delta + half))
    lo = float(np.min(delta - half))
    return ref_angle + hi, ref_angle + lo


def _planar_reading(idx, o, p, d, q, margin, r_sensor):
    centers, radii = o.silhouette(p, margin, r_sensor, True)
    t = q - p
    ref = math.atan2(t[1], t[0]) if math.hypot(t[0], t[1]) > 1e-12 else _ref_from_centers(p, centers)
    a1, a2 = angular_extent(p[:2], ref, centers[:, :2], radii)
    return SensorReading(
        idx, d, q, o.surface_velocity(q), (wrap_angle(a1), wrap_angle(a2)), np.array([t[0], t[1], 0.0])
    )


def _ref_from_centers(p, centers):
    c = centers.mean(axis=0) - p
    return math.atan2(c[1], c[0]) if math.hypot(c[0], c[1]) > 1e-12 else 0.0


def _in_plane_discs(plane: AvoidancePlane, centers: Array, radii: Array):
    rel = centers - plane.origin
    h = rel @ plane.normal
    keep = np.abs(h) < radii
    c2 = np.column_stack([rel[keep] @ plane.in_plane_x, rel[keep] @ plane.in_plane_y])
    r2 = np.sqrt(radii[keep] ** 2 - h[keep] ** 2)
    return c2, r2


def _spatial_reading(idx, o, p, heading, d, q, margin, r_sensor):
    centers, radii = o.silhouette(p, margin, r_sensor, False)
    t = q - p
    if np.linalg.norm(t) < 1e-12:
        t = centers.mean(axis=0) - p
        if np.linalg.norm(t) < 1e-12:
            t = heading.copy()
    lateral = np.cross([0.0, 0.0, 1.0], heading)
    if np.linalg.norm(lateral) < 1e-9:
        lateral = np.array([0.0, 1.0, 0.0])
    lateral = normalize(lateral)
    aux = (q + 0.1 * lateral, q + np.array([0.0, 0.0, 0.1]))
    try:
        plane = avoidance_plane(p, heading, t, aux)
    except Exception:
        plane = vertical_plane(p, heading)
    terrain = isinstance(o, TerrainObstacle)
    if terrain:
        if _nearly_vertical(t):
            plane = vertical_plane(p, heading)
    c2, r2 = _in_plane_discs(plane, centers, radii)
    ref_vec = plane.to_plane(t)
    if np.linalg.norm(ref_vec) < 1e-12 or len(c2) == 0:
        # silhouette misses this plane: fall back to a plane containing the vertical
        plane = vertical_plane(p, heading)
        c2, r2 = _in_plane_discs(plane, centers, radii)
        ref_vec = plane.to_plane(t)
        if len(c2) == 0:
            c2, r2 = plane.to_plane(t)[None, :], np.array([margin])
    if np.linalg.norm(ref_vec) < 1e-12:
        ref_vec = c2.mean(axis=0)
    ref = math.atan2(ref_vec[1], ref_vec[0])
    a1, a2 = angular_extent(np.zeros(2), ref, c2, r2)
    if a1 - a2 >= math.pi and not terrain:
        # no visible edge on either side in this plane: climb/descend instead
        wall = vertical_plane(p, heading)
        c2w, r2w = _in_plane_discs(wall, centers, radii)
        if len(c2w):
            rv = wall.to_plane(t)
            ref_w = math.atan2(rv[1], rv[0]) if np.linalg.norm(rv) > 1e-12 else 0.0
            plane = wall
            a1, a2 = angular_extent(np.zeros(2), ref_w, c2w, r2w)
    sides = (1, 2)
    if terrain:
        # only the edge that passes above the ground is admissible
        up1 = math.sin(a1) * plane.in_plane_y[2] + math.cos(a1) * plane.in_plane_x[2]
        up2 = math.sin(a2) * plane.in_plane_y[2] + math.cos(a2) * plane.in_plane_x[2]
        sides = (1,) if up1 >= up2 else (2,)
    return SensorReading(
        idx,
        d,
        q,
        o.surface_velocity(q),
        (wrap_angle(a1), wrap_angle(a2)),
        t,
        aux,
        planar=False,
        plane=plane,
        allowed_sides=sides,
    )


def _nearly_vertical(t: Array) -> bool:
    n = np.linalg.norm(t)
    return n > 0 and abs(t[2]) / n > 0.999


def sense(
    p: ArrayLike,
    heading: ArrayLike,
    obstacles: Sequence[Obstacle],
    R_sensor: float,
    margin: float = 0.0,
) -> list[SensorReading]:
    """Readings for every obstacle within ``R_sensor``, nearest first.

    A 2-component ``heading`` selects planar sensing (angles in the world
    frame); a 3-component heading selects sensing in the avoidance plane.
    ``margin`` inflates every silhouette before the edges are measured.
    """
    if R_sensor <= 0:
        raise ValueError("R_sensor must be positive")
    p = vec3(p)
    heading = np.asarray(heading, dtype=float)
    planar = heading.shape[0] == 2
    if not planar:
        heading = normalize(heading)
    out = []
    for idx, o in enumerate(obstacles):
        if isinstance(o, DeformableBoundary) and o.empty:
            continue
        d, q = o.distance(p)
        if d > R_sensor:
            continue
        if planar:
            out.append(_planar_reading(idx, o, p, d, q, margin, R_sensor))
        else:
            out.append(_spatial_reading(idx, o, p, heading, d, q, margin, R_sensor))
    out.sort(key=lambda r: (r.distance, r.obstacle_index))
    return out
