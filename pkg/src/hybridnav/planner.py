"""Sampling-based global planning and path post-processing.

Pipeline used by the hybrid mode: RRT-connect, backward visibility pruning,
l1 node shortcutting, then clamped cubic B-spline smoothing. Candidate paths
from several seeded rounds are ranked by a weighted, min-max normalised cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import MissingHazardContext, NoPathFound, StartOrGoalBlocked
from .world import Obstacle

Array = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class Path:
    waypoints: Array

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        if len(w) == 0:
            raise ValueError("a path needs at least one waypoint")
        if len(w) > 1:
            keep = np.concatenate([[True], np.any(np.diff(w, axis=0) != 0.0, axis=1)])
            w = w[keep]
        object.__setattr__(self, "waypoints", w)

    def __len__(self) -> int:
        return len(self.waypoints)

    @property
    def start(self) -> Array:
        return self.waypoints[0]

    @property
    def goal(self) -> Array:
        return self.waypoints[-1]

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)))

    def l1_length(self) -> float:
        return l1_length(self.waypoints)


def l1_length(w: Array) -> float:
    return float(np.sum(np.abs(np.diff(w, axis=0))))


@dataclass(frozen=True, eq=False)
class RectSet(Obstacle):
    """Many axis-aligned rectangles queried together (occupancy-grid worlds)."""

    lo: Array = None
    hi: Array = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(-1, 2))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(-1, 2))

    @classmethod
    def from_cells(cls, cells: Sequence[tuple[int, int]], cell: float = 1.0, origin=(0.0, 0.0)) -> "RectSet":
        c = np.asarray(cells, dtype=float).reshape(-1, 2) * cell + np.asarray(origin)
        return cls(lo=c, hi=c + cell)

    def distances(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if len(self.lo) == 0:
            return np.full(len(pts), np.inf)
        x = pts[:, None, 0]
        y = pts[:, None, 1]
        dx = np.maximum(np.maximum(self.lo[None, :, 0] - x, x - self.hi[None, :, 0]), 0.0)
        dy = np.maximum(np.maximum(self.lo[None, :, 1] - y, y - self.hi[None, :, 1]), 0.0)
        return np.min(np.hypot(dx, dy), axis=1)

    def distance(self, p):
        p = np.asarray(p, dtype=float)
        q = np.clip(p[:2], self.lo, self.hi)
        d = np.hypot(*(p[:2] - q).T)
        i = int(np.argmin(d))
        out = p.copy()
        out[:2] = q[i]
        return float(d[i]), out

    def translated(self, delta):
        return self


@dataclass(frozen=True, eq=False)
class PlanningWorld:
    """Box bounds plus obstacles, each inflated by its own clearance."""

    lo: Array
    hi: Array
    obstacles: tuple[Obstacle, ...] = ()
    clearances: Array | None = None
    check_spacing: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        c = np.zeros(len(self.obstacles)) if self.clearances is None else self.clearances
        c = np.broadcast_to(np.asarray(c, dtype=float), (len(self.obstacles),)).copy()
        object.__setattr__(self, "clearances", c)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def with_clearance(self, c: float | Sequence[float]) -> "PlanningWorld":
        return replace(self, clearances=np.broadcast_to(np.asarray(c, dtype=float), (len(self.obstacles),)).copy())

    def relaxed_for(self, *points: ArrayLike, factor: float = 0.9) -> "PlanningWorld":
        """Cap each obstacle's clearance so that the given points stay feasible."""
        c = self.clearances.copy()
        for k, o in enumerate(self.obstacles):
            for p in points:
                d = float(o.distances(np.atleast_2d(_pad(p)))[0])
                c[k] = min(c[k], factor * d)
        return replace(self, clearances=np.maximum(c, 0.0))

    def margins(self, pts: Array) -> Array:
        """Distance minus clearance for each point (negative means blocked)."""
        pts = np.atleast_2d(pts)
        m = np.full(len(pts), np.inf)
        p3 = _pad(pts)
        for o, c in zip(self.obstacles, self.clearances):
            m = np.minimum(m, o.distances(p3) - c)
        return m

    def inside_bounds(self, pts: Array) -> NDArray[np.bool_]:
        pts = np.atleast_2d(pts)
        return np.all((pts >= self.lo - 1e-9) & (pts <= self.hi + 1e-9), axis=1)

    def point_free(self, p: ArrayLike) -> bool:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        return bool(self.inside_bounds(p)[0] and self.margins(p)[0] >= 0.0)

    def segment_free(self, a: ArrayLike, b: ArrayLike, spacing: float) -> bool:
        """Sub-sampled check that is conservative between samples.

        Every point of the segment is within half the sample spacing of some
        sample, so requiring that extra slack at the samples covers the gaps.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        L = float(np.linalg.norm(b - a))
        n = max(1, int(math.ceil(L / spacing)))
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        pts = a + t * (b - a)
        if not np.all(self.inside_bounds(pts)):
            return False
        slack = 0.5 * L / n
        return bool(np.all(self.margins(pts) >= slack))


def _pad(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] == 2:
        z = np.zeros(p.shape[:-1] + (1,))
        return np.concatenate([p, z], axis=-1)
    return p


@dataclass(frozen=True)
class RrtParams:
    step_size: float = 1.0
    max_iterations: int = 4000
    goal_bias: float = 0.1
    corridor_bias: float = 0.3
    rng_seed: int = 0

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if not (0.0 <= self.goal_bias and 0.0 <= self.corridor_bias and self.goal_bias + self.corridor_bias <= 1.0):
            raise ValueError("biases must be non-negative and sum to at most 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @property
    def check_spacing(self) -> float:
        return self.step_size / 4.0


@dataclass(frozen=True)
class CostWeights:
    alpha: float = 1.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if any(not (0.0 <= x <= 1.0) for x in w):
            raise ValueError("cost weights must lie in [0, 1]")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError(f"cost weights must sum to 1, got {sum(w):.12g}")


# ---------------------------------------------------------------- RRT-connect


class _Tree:
    def __init__(self, root: Array, capacity: int):
        self.nodes = np.empty((capacity + 1, len(root)))
        self.nodes[0] = root
        self.parent = [-1]
        self.n = 1

    def nearest(self, q: Array) -> int:
        d = np.sum((self.nodes[: self.n] - q) ** 2, axis=1)
        return int(np.argmin(d))  # first minimum: lowest index wins ties

    def add(self, q: Array, parent: int) -> int:
        if self.n >= len(self.nodes):
            self.nodes = np.vstack([self.nodes, np.empty_like(self.nodes)])
        self.nodes[self.n] = q
        self.parent.append(parent)
        self.n += 1
        return self.n - 1

    def branch(self, i: int) -> list[Array]:
        out = []
        while i >= 0:
            out.append(self.nodes[i].copy())
            i = self.parent[i]
        return out


_TRAPPED, _ADVANCED, _REACHED = 0, 1, 2


def _extend(tree: _Tree, q: Array, world: PlanningWorld, params: RrtParams) -> tuple[int, int]:
    i = tree.nearest(q)
    base = tree.nodes[i]
    delta = q - base
    dist = float(np.linalg.norm(delta))
    if dist <= params.step_size:
        new, status = q, _REACHED
    else:
        new, status = base + delta * (params.step_size / dist), _ADVANCED
    if dist == 0.0:
        return _REACHED, i
    if not world.segment_free(base, new, params.check_spacing):
        return _TRAPPED, -1
    return status, tree.add(new, i)


def _connect(tree: _Tree, q: Array, world: PlanningWorld, params: RrtParams) -> tuple[int, int]:
    while True:
        status, idx = _extend(tree, q, world, params)
        if status != _ADVANCED:
            return status, idx


def _sample(rng, world: PlanningWorld, params: RrtParams, target: Array, corridor: Array | None) -> Array:
    r = rng.random()
    if r < params.goal_bias:
        return target.copy()
    if corridor is not None and len(corridor) > 1 and r < params.goal_bias + params.corridor_bias:
        return _sample_capsule(rng, world, corridor, 3.0 * params.step_size)
    return world.lo + rng.random(world.dim) * (world.hi - world.lo)


def _sample_capsule(rng, world: PlanningWorld, poly: Array, radius: float) -> Array:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    k = int(np.searchsorted(np.cumsum(seg) / seg.sum(), rng.random(), side="right"))
    k = min(k, len(seg) - 1)
    base = poly[k] + rng.random() * (poly[k + 1] - poly[k])
    d = rng.normal(size=world.dim)
    d /= max(np.linalg.norm(d), 1e-12)
    q = base + d * radius * rng.random() ** (1.0 / world.dim)
    return np.clip(q, world.lo, world.hi)


def plan_rrt_connect(
    start: ArrayLike,
    goal: ArrayLike,
    world: PlanningWorld,
    params: RrtParams,
    corridor: Path | None = None,
    rng: np.random.Generator | None = None,
) -> Path:
    """Bidirectional RRT. ``corridor`` is the current best path, if any."""
    start = np.asarray(start, dtype=float)[: world.dim]
    goal = np.asarray(goal, dtype=float)[: world.dim]
    if not world.point_free(start) or not world.point_free(goal):
        raise StartOrGoalBlocked("start or goal violates clearance or bounds")
    if np.array_equal(start, goal):
        return Path(start[None, :])
    rng = np.random.default_rng(params.rng_seed) if rng is None else rng
    if world.segment_free(start, goal, params.check_spacing):
        return Path(np.vstack([start, goal]))
    poly = None if corridor is None else corridor.waypoints[:, : world.dim]
    ta, tb = _Tree(start, params.max_iterations), _Tree(goal, params.max_iterations)
    a_is_start = True
    for _ in range(params.max_iterations):
        q = _sample(rng, world, params, tb.nodes[0], poly)
        status, ia = _extend(ta, q, world, params)
        if status != _TRAPPED:
            cstatus, ib = _connect(tb, ta.nodes[ia], world, params)
            if cstatus == _REACHED:
                pa = ta.branch(ia)[::-1]
                pb = tb.branch(ib)[1:]
                pts = pa + pb if a_is_start else (pb[::-1] + pa[::-1])
                pts[0], pts[-1] = start.copy(), goal.copy()
                return Path(np.array(pts))
        ta, tb = tb, ta
        a_is_start = not a_is_start
    raise NoPathFound(f"no connection after {params.max_iterations} iterations")


# ---------------------------------------------------------------- post-processing


def prune(path: Path, world: PlanningWorld, spacing: float | None = None) -> Path:
    """Backward visibility walk keeping the earliest waypoint visible from the current one."""
    spacing = world.check_spacing if spacing is None else spacing
    w = path.waypoints
    n = len(w)
    if n <= 2:
        return path
    keep = [n - 1]
    j = n - 1
    while j > 0:
        nxt = j - 1
        for i in range(0, j - 1):
            if world.segment_free(w[i], w[j], spacing):
                nxt = i
                break
        keep.append(nxt)
        j = nxt
    return Path(w[keep[::-1]])


def shortcut_j1(
    path: Path, world: PlanningWorld, spacing: float | None = None, max_passes: int = 20
) -> tuple[Path, float, float]:
    """Node replacement accepting only free substitutions with strictly smaller l1 length."""
    spacing = world.check_spacing if spacing is None else spacing
    w = path.waypoints.copy()
    before = l1_length(w)
    if len(w) < 3:
        return path, before, before
    for _ in range(max_passes):
        improved = False
        i = 1
        while i < len(w) - 1:
            a, p, b = w[i - 1], w[i], w[i + 1]
            old = float(np.sum(np.abs(p - a)) + np.sum(np.abs(b - p)))
            direct = float(np.sum(np.abs(b - a)))
            if direct < old - 1e-12 and world.segment_free(a, b, spacing):
                w = np.delete(w, i, axis=0)
                improved = True
                continue
            ab = b - a
            t = float(np.clip(((p - a) @ ab) / max(ab @ ab, 1e-300), 0.0, 1.0))
            foot = a + t * ab
            for c in _replacement_candidates(a, p, b, foot):
                new = float(np.sum(np.abs(c - a)) + np.sum(np.abs(b - c)))
                if new < old - 1e-12 and world.segment_free(a, c, spacing) and world.segment_free(c, b, spacing):
                    w[i] = c
                    improved = True
                    break
            i += 1
        if not improved:
            break
    after = l1_length(w)
    if after > before:
        return path, before, before
    return Path(w), before, after


def _replacement_candidates(a, p, b, foot):
    # toward the chord first, then slide along each incident segment; the
    # latter never lengthens the path (triangle inequality in any norm)
    for frac in (0.5, 0.25, 0.125):
        yield p + frac * (foot - p)
    for frac in (0.5, 0.25, 0.125, 0.0625):
        yield p + frac * (a - p)
        yield p + frac * (b - p)


def densify(w: Array, max_span: float) -> Array:
    """Insert collinear points so that no span exceeds ``max_span``."""
    out = [w[0]]
    for a, b in zip(w[:-1], w[1:]):
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / max_span)))
        for k in range(1, n + 1):
            out.append(b if k == n else a + (b - a) * (k / n))
    return np.array(out)


def turning_angles(w: Array) -> Array:
    d = np.diff(w, axis=0)
    if len(d) < 2:
        return np.zeros(0)
    u, v = d[:-1], d[1:]
    dot = np.sum(u * v, axis=1)
    if d.shape[1] == 2:
        cross = np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    else:
        cross = np.linalg.norm(np.cross(u, v), axis=1)
    return np.arctan2(cross, dot)


def j2_angle_sum(w: Array) -> float:
    return float(np.sum(turning_angles(np.asarray(w, dtype=float))))


def bspline_basis(knots: Array, degree: int, t: Array) -> Array:
    """Cox-de Boor basis matrix of shape (len(t), n_ctrl)."""
    t = np.asarray(t, dtype=float)
    n_ctrl = len(knots) - degree - 1
    last = knots[-1]
    B = np.zeros((len(t), len(knots) - 1))
    for i in range(len(knots) - 1):
        lo, hi = knots[i], knots[i + 1]
        if lo < hi:
            B[:, i] = (t >= lo) & ((t < hi) | ((hi == last) & (t == last)))
    for k in range(1, degree + 1):
        Bn = np.zeros((len(t), len(knots) - 1 - k))
        for i in range(len(knots) - 1 - k):
            d1 = knots[i + k] - knots[i]
            d2 = knots[i + k + 1] - knots[i + 1]
            term = np.zeros(len(t))
            if d1 > 0:
                term += (t - knots[i]) / d1 * B[:, i]
            if d2 > 0:
                term += (knots[i + k + 1] - t) / d2 * B[:, i + 1]
            Bn[:, i] = term
        B = Bn
    return B[:, :n_ctrl]


def clamped_knots(n_ctrl: int, degree: int) -> Array:
    inner = n_ctrl - degree - 1
    mid = np.linspace(0.0, 1.0, inner + 2)[1:-1] if inner > 0 else np.zeros(0)
    return np.concatenate([np.zeros(degree + 1), mid, np.ones(degree + 1)])


def smooth_j2(
    path: Path,
    world: PlanningWorld,
    samples_per_span: int = 8,
    spacing: float | None = None,
    max_span: float | None = None,
) -> tuple[Path, float, float]:
    """Sample a clamped cubic B-spline over the control polygon; fall back to the input on any violation.

    ``max_span`` optionally subdivides long spans first so the curve stays
    close to the polygon and only rounds the corners.
    """
    before = j2_angle_sum(path.waypoints)
    if len(path) < 3:
        return path, before, before
    w = path.waypoints if max_span is None else densify(path.waypoints, max_span)
    degree = min(3, len(w) - 1)
    knots = clamped_knots(len(w), degree)
    t = np.linspace(0.0, 1.0, samples_per_span * (len(w) - 1) + 1)
    pts = bspline_basis(knots, degree, t) @ w
    pts[0] = path.waypoints[0]
    pts[-1] = path.waypoints[-1]
    cand = Path(pts)
    after = j2_angle_sum(cand.waypoints)
    if after > before:
        return path, before, before
    spacing = world.check_spacing if spacing is None else spacing
    c = cand.waypoints
    for k in range(len(c) - 1):
        if not world.segment_free(c[k], c[k + 1], spacing):
            return path, before, before
    return cand, before, after


# ---------------------------------------------------------------- cost


def hazard_cost(w: Array, hazard, d_floor: float = 0.5) -> float:
    w = np.asarray(w, dtype=float)
    if len(w) < 2:
        return 0.0
    seg = np.linalg.norm(np.diff(w, axis=0), axis=1)
    mid = 0.5 * (w[1:] + w[:-1])
    d = np.full(len(mid), np.inf)
    for h in _hazard_list(hazard):
        d = np.minimum(d, h.distances(_pad(mid)))
    return float(np.sum(seg / np.maximum(d, d_floor)))


def _hazard_list(hazard):
    from .fire import FireGrid, burning_boundary

    if isinstance(hazard, FireGrid):
        return [burning_boundary(hazard)]
    if isinstance(hazard, Obstacle):
        return [hazard]
    return list(hazard)


def path_terms(path: Path, hazard=None) -> tuple[float, float, float]:
    w = path.waypoints
    j3 = hazard_cost(w, hazard) if hazard is not None else 0.0
    return l1_length(w), j2_angle_sum(w), j3


def total_cost(candidates: Sequence[Path], weights: CostWeights, hazard=None) -> Array:
    """Weighted sum of min-max normalised (J1, J2, J3) for each candidate."""
    if weights.gamma > 0 and hazard is None:
        raise MissingHazardContext("gamma > 0 requires a hazard context")
    if isinstance(candidates, Path):
        candidates = [candidates]
    terms = np.array([path_terms(p, hazard if weights.gamma > 0 else None) for p in candidates])
    lo = terms.min(axis=0)
    span = terms.max(axis=0) - lo
    norm = np.where(span > 0, (terms - lo) / np.where(span > 0, span, 1.0), 0.0)
    return norm @ np.array([weights.alpha, weights.beta, weights.gamma])


# ---------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class PlannerConfig:
    rrt: RrtParams = field(default_factory=RrtParams)
    weights: CostWeights = field(default_factory=CostWeights)
    rounds: int = 3
    smooth: bool = True
    samples_per_span: int = 2
    smooth_span: float = 2.0
    smooth_margin: float = 0.5


def plan_path(start, goal, world: PlanningWorld, cfg: PlannerConfig, hazard=None, seed: int | None = None) -> Path:
    """Full hybrid pipeline; rounds after the first sample around the best path so far."""
    rng = np.random.default_rng(cfg.rrt.rng_seed if seed is None else seed)
    start = np.asarray(start, dtype=float)[: world.dim]
    goal = np.asarray(goal, dtype=float)[: world.dim]
    base = world.relaxed_for(start, goal)
    padded = base.with_clearance(base.clearances + cfg.smooth_margin).relaxed_for(start, goal)
    spacing = cfg.rrt.check_spacing
    candidates: list[Path] = []
    best: Path | None = None
    last_err: Exception | None = None
    for r in range(max(1, cfg.rounds)):
        try:
            raw = plan_rrt_connect(start, goal, padded, cfg.rrt, corridor=best, rng=rng)
        except NoPathFound as e:
            last_err = e
            continue
        p = prune(raw, padded, spacing)
        p, _, _ = shortcut_j1(p, padded, spacing)
        candidates.append(p)
        if best is None or p.length() < best.length():
            best = p
        if len(p) == 2:
            break
    if not candidates:
        raise last_err if last_err is not None else NoPathFound("planning failed")
    gamma_hazard = hazard if cfg.weights.gamma > 0 else None
    q = total_cost(candidates, cfg.weights, gamma_hazard)
    chosen = candidates[int(np.argmin(q))]
    if cfg.smooth:
        chosen, _, _ = smooth_j2(chosen, base, cfg.samples_per_span, spacing, cfg.smooth_span)
    return chosen
