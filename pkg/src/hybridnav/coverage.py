"""Area coverage, partitioning and rescue routing for the multi-vehicle mission."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .planner import Path
from .world import DeformableBoundary

Array = NDArray[np.float64]


@dataclass(frozen=True)
class Region:
    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        if not (self.hi[0] >= self.lo[0] and self.hi[1] >= self.lo[1]):
            raise ValueError("region corners out of order")

    @property
    def width(self) -> float:
        return self.hi[0] - self.lo[0]

    @property
    def height(self) -> float:
        return self.hi[1] - self.lo[1]

    @classmethod
    def bounding(cls, pts: ArrayLike, pad: float = 0.0) -> "Region":
        pts = np.asarray(pts, dtype=float)
        lo = pts.min(axis=0) - pad
        hi = pts.max(axis=0) + pad
        return cls((float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1])))


@dataclass(frozen=True)
class SensorFootprint:
    altitude: float
    half_angle: float

    @property
    def radius(self) -> float:
        return self.altitude * math.tan(self.half_angle)


def lawnmower(region: Region, footprint: SensorFootprint, overlap: float = 1.0) -> Path:
    """Boustrophedon lanes along x at the footprint altitude.

    Lanes are ``2 r overlap`` apart starting ``r`` above the lower edge; the
    last lane is pulled inside so it never sits beyond ``hi - r``.
    """
    r = footprint.radius
    if r <= 0:
        raise ValueError("footprint radius must be positive")
    spacing = 2.0 * r * overlap
    x0, y0 = region.lo
    x1, y1 = region.hi
    if region.height <= 2.0 * r:
        ys = [0.5 * (y0 + y1)]
    else:
        n = int(math.ceil(region.height / spacing - 1e-9))
        ys = [min(y0 + r + k * spacing, y1 - r) for k in range(n)]
    z = footprint.altitude
    pts = []
    for k, y in enumerate(ys):
        xs = (x0, x1) if k % 2 == 0 else (x1, x0)
        pts.append((xs[0], y, z))
        pts.append((xs[1], y, z))
    return Path(np.array(pts))


def coverage_fraction(region: Region, path: Path, radius: float, cell: float = 1.0) -> float:
    """Share of ``cell``-sized raster cells whose centre is within ``radius`` of the path."""
    xs = np.arange(region.lo[0] + cell / 2, region.hi[0], cell)
    ys = np.arange(region.lo[1] + cell / 2, region.hi[1], cell)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    w = path.waypoints[:, :2]
    best = np.full(len(pts), np.inf)
    for a, b in zip(w[:-1], w[1:]):
        d = b - a
        L2 = float(d @ d)
        t = np.zeros(len(pts)) if L2 == 0 else np.clip(((pts - a) @ d) / L2, 0.0, 1.0)
        q = a + t[:, None] * d
        best = np.minimum(best, np.hypot(*(pts - q).T))
    return float(np.mean(best <= radius + 1e-9))


@dataclass(frozen=True, eq=False)
class Partition:
    labels: NDArray[np.int64]
    centroids: Array
    objective_history: tuple[float, ...]
    iterations: int

    def cells(self, points: ArrayLike, k: int) -> Array:
        return np.asarray(points)[self.labels == k]

    def regions(self, points: ArrayLike, pad: float = 0.0) -> list[Region]:
        pts = np.asarray(points)
        return [Region.bounding(pts[self.labels == k], pad) for k in range(len(self.centroids))]


def _sse(pts, centroids, labels) -> float:
    return float(np.sum((pts - centroids[labels]) ** 2))


def kmeans_partition(
    free_cells: ArrayLike, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6
) -> Partition:
    """Lloyd iterations from k-means++ seeding."""
    pts = np.asarray(free_cells, dtype=float)
    n = len(pts)
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= number of cells")
    rng = np.random.default_rng(seed)
    centroids = [pts[int(rng.integers(n))]]
    d2 = np.sum((pts - centroids[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # every remaining point coincides with a centroid: take unused indices in order
            idx = next(i for i in range(n) if not any(np.array_equal(pts[i], c) for c in centroids))
        else:
            idx = int(np.searchsorted(np.cumsum(d2) / total, rng.random(), side="right"))
            idx = min(idx, n - 1)
        centroids.append(pts[idx])
        d2 = np.minimum(d2, np.sum((pts - pts[idx]) ** 2, axis=1))
    C = np.array(centroids)
    labels = np.argmin(((pts[:, None, :] - C[None]) ** 2).sum(-1), axis=1)
    history = [_sse(pts, C, labels)]
    it = 0
    for it in range(1, max_iter + 1):
        newC = C.copy()
        for j in range(k):
            members = pts[labels == j]
            if len(members):
                newC[j] = members.mean(axis=0)
            else:
                # empty cluster: move it onto the point worst served so far
                far = int(np.argmax(np.sum((pts - C[labels]) ** 2, axis=1)))
                newC[j] = pts[far]
                labels[far] = j
        shift = float(np.max(np.linalg.norm(newC - C, axis=1)))
        C = newC
        labels = np.argmin(((pts[:, None, :] - C[None]) ** 2).sum(-1), axis=1)
        history.append(_sse(pts, C, labels))
        if shift < tol:
            break
    return Partition(labels, C, tuple(history), it)


@dataclass(frozen=True)
class Victim:
    id: int
    position: tuple[float, float, float]
    fire_distance: float = math.inf


def prioritize_victims(victims: Sequence[Victim], fire_boundary: DeformableBoundary | None) -> list[Victim]:
    """Closest to the fire first; ties by id."""
    out = []
    for v in victims:
        if fire_boundary is None or fire_boundary.empty:
            d = math.inf
        else:
            p = np.asarray(v.position, dtype=float)
            d = float(fire_boundary.distances(p[None, :])[0])
        out.append(replace(v, fire_distance=d))
    out.sort(key=lambda v: (v.fire_distance, v.id))
    return out


def build_rescue_route(ugv_start, ordered_victims: Sequence[Victim], safe_zone) -> list[Array]:
    """Victim positions in priority order, then the safe zone."""
    goals = [np.asarray(v.position, dtype=float) for v in ordered_victims]
    goals.append(np.asarray(safe_zone, dtype=float))
    return goals


@dataclass(frozen=True)
class EnergyModel:
    p_base: float = 100.0
    p_speed: float = 5.0
    p_climb: float = 20.0

    def __post_init__(self):
        if min(self.p_base, self.p_speed, self.p_climb) < 0:
            raise ValueError("power coefficients must be non-negative")


def energy(trajectory: ArrayLike, model: EnergyModel, dt: float) -> float:
    """Energy of a uniformly sampled (N, 3) position trace."""
    p = np.asarray(trajectory, dtype=float)
    if len(p) < 2:
        return 0.0
    d = np.diff(p, axis=0) / dt
    v2 = np.sum(d**2, axis=1)
    climb = np.maximum(d[:, 2], 0.0) if p.shape[1] > 2 else 0.0
    return float(np.sum((model.p_base + model.p_speed * v2 + model.p_climb * climb) * dt))
