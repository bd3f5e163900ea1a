"""Planar and spatial angle helpers, avoidance planes and frame changes.

Angles follow the counter-clockwise convention with range (-pi, pi]; the
antipodal case maps to +pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegeneratePlane, ZeroVector

ZERO_NORM = 1e-12
ORTHO_TOL = 1e-9

_Z = np.array([0.0, 0.0, 1.0])
_X = np.array([1.0, 0.0, 0.0])


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = math.remainder(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


def normalize(v: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n < ZERO_NORM:
        raise ZeroVector(f"cannot normalize vector with norm {n:.3g}")
    return v / n


def signed_angle(a: ArrayLike, b: ArrayLike, normal: ArrayLike | None = None) -> float:
    """Counter-clockwise angle from ``a`` to ``b`` in (-pi, pi].

    2D inputs are measured in the xy-plane. For 3D inputs the rotation sense
    is taken about ``normal`` (default +z); components along the normal are
    ignored.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.norm(a) < ZERO_NORM or np.linalg.norm(b) < ZERO_NORM:
        raise ZeroVector("signed_angle needs two non-zero vectors")
    if a.shape[0] == 2 and normal is None:
        cross = a[0] * b[1] - a[1] * b[0]
        dot = a[0] * b[0] + a[1] * b[1]
    else:
        n = _Z if normal is None else normalize(normal)
        a3 = _pad3(a)
        b3 = _pad3(b)
        cross = float(np.dot(np.cross(a3, b3), n))
        dot = float(np.dot(a3, b3) - np.dot(a3, n) * np.dot(b3, n))
    ang = math.atan2(cross, dot)
    if ang <= -math.pi:
        ang = math.pi
    return ang


def turn_sign(a: ArrayLike, b: ArrayLike, normal: ArrayLike | None = None) -> int:
    """Sign of ``signed_angle(a, b)``: 0, +1 on (0, pi], -1 on (-pi, 0)."""
    phi = signed_angle(a, b, normal)
    if phi == 0.0:
        return 0
    return 1 if phi > 0.0 else -1


def _pad3(v: NDArray[np.float64]) -> NDArray[np.float64]:
    if v.shape[0] == 3:
        return v
    return np.array([v[0], v[1], 0.0])


@dataclass(frozen=True)
class AvoidancePlane:
    """Plane through the robot spanned by its heading and the obstacle direction.

    ``in_plane_x`` is the heading, ``in_plane_y = normal x in_plane_x`` so the
    frame is right-handed. ``turn_axis`` is ``heading x normal``.
    """

    origin: NDArray[np.float64]
    normal: NDArray[np.float64]
    in_plane_x: NDArray[np.float64]
    in_plane_y: NDArray[np.float64]

    @property
    def turn_axis(self) -> NDArray[np.float64]:
        return np.cross(self.in_plane_x, self.normal)

    def to_plane(self, v: ArrayLike) -> NDArray[np.float64]:
        """In-plane (x, y) components of a free vector."""
        v = np.asarray(v, dtype=float)
        return np.array([np.dot(v, self.in_plane_x), np.dot(v, self.in_plane_y)])

    def from_plane(self, v2: ArrayLike) -> NDArray[np.float64]:
        return v2[0] * self.in_plane_x + v2[1] * self.in_plane_y


def _oriented_normal(n: NDArray[np.float64], heading: NDArray[np.float64]) -> NDArray[np.float64]:
    # Fix the sign so the same geometry yields the same plane orientation on
    # consecutive steps: upward normals for tilted planes, and a heading-relative
    # reference for vertical planes.
    if abs(n[2]) > ORTHO_TOL:
        return n if n[2] > 0 else -n
    ref = np.cross(_Z, heading)
    if np.linalg.norm(ref) < ORTHO_TOL:
        ref = _X
    return n if np.dot(n, ref) >= 0 else -n


def _plane_from_normal(position, heading, n) -> AvoidancePlane:
    n = _oriented_normal(n, heading)
    y = np.cross(n, heading)
    y /= np.linalg.norm(y)
    return AvoidancePlane(np.asarray(position, dtype=float).copy(), n, heading.copy(), y)


def avoidance_plane(
    position: ArrayLike,
    orientation: ArrayLike,
    tangent_to_obstacle: ArrayLike,
    aux_obstacle_points: Sequence[ArrayLike] = (),
) -> AvoidancePlane:
    """Build the avoidance plane from the heading and the obstacle direction.

    If the obstacle direction is parallel to the heading, the auxiliary
    obstacle points (absolute positions) are tried in order.
    """
    p = np.asarray(position, dtype=float)
    a = normalize(orientation)
    candidates = [np.asarray(tangent_to_obstacle, dtype=float)]
    if np.linalg.norm(candidates[0]) < ZERO_NORM:
        raise ZeroVector("obstacle tangent has zero length")
    candidates += [np.asarray(q, dtype=float) - p for q in aux_obstacle_points]
    for t in candidates:
        tn = float(np.linalg.norm(t))
        if tn < ZERO_NORM:
            continue
        n = np.cross(a, t)
        nn = float(np.linalg.norm(n))
        if nn > ORTHO_TOL * tn:
            return _plane_from_normal(p, a, n / nn)
    raise DegeneratePlane("obstacle direction parallel to heading and no usable auxiliary point")


def vertical_plane(position: ArrayLike, orientation: ArrayLike) -> AvoidancePlane:
    """Plane containing the heading and the vertical axis (climb/descend plane)."""
    a = normalize(orientation)
    n = np.cross(a, _Z)
    if np.linalg.norm(n) < ORTHO_TOL:
        n = np.cross(a, _X)
    return _plane_from_normal(position, a, normalize(n))


@dataclass(frozen=True)
class FrameTransform:
    """Rigid change of frame: ``local = rotation @ (p - translation)``."""

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]

    def forward(self, p: ArrayLike) -> NDArray[np.float64]:
        p = np.asarray(p, dtype=float)
        return (p - self.translation) @ self.rotation.T

    def inverse(self, q: ArrayLike) -> NDArray[np.float64]:
        q = np.asarray(q, dtype=float)
        return q @ self.rotation + self.translation


def frame_from_plane(plane: AvoidancePlane) -> FrameTransform:
    rot = np.vstack([plane.in_plane_x, plane.in_plane_y, plane.normal])
    return FrameTransform(rot, np.asarray(plane.origin, dtype=float).copy())
