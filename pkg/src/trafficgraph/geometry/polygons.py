"""Point-in-polygon and oriented-rectangle overlap tests.

Polygons are simple closed rings given as vertex arrays; a repeated
closing vertex is tolerated.  Containment uses the even-odd rule, with
points within ``1e-12`` m of the boundary counting as inside so that
results at shared edges are stable.
"""
from __future__ import annotations

import numpy as np

from ..errors import GeometryError
from .frames import LocalFrame
from .intersect import segment_intersection

__all__ = [
    "point_in_polygon",
    "points_in_polygon",
    "rectangle_corners",
    "rectangle_polygon_overlap",
]

_BOUNDARY_TOL = 1e-12


def _as_ring(polygon) -> np.ndarray:
    ring = np.asarray(polygon, dtype=float)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise GeometryError(f"expected (n, 2) polygon, got shape {ring.shape}")
    if not np.isfinite(ring).all():
        raise GeometryError("polygon vertices must be finite")
    if len(ring) >= 2 and np.array_equal(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(np.unique(ring, axis=0)) < 3:
        raise GeometryError("degenerate polygon: fewer than 3 distinct vertices")
    return ring


def _edge_distances(pts: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest polygon edge."""
    v1 = ring
    v2 = np.roll(ring, -1, axis=0)
    edge = v2 - v1  # (e, 2)
    ee = np.einsum("ij,ij->i", edge, edge)
    w = pts[:, None, :] - v1[None, :, :]  # (p, e, 2)
    we = np.einsum("pej,ej->pe", w, edge)
    t = np.divide(we, ee, out=np.zeros_like(we), where=ee > 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = v1[None, :, :] + t[:, :, None] * edge[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - closest, axis=2)
    return d.min(axis=1)


def points_in_polygon(points, polygon) -> np.ndarray:
    """Even-odd containment for a batch of points; boundary counts inside."""
    ring = _as_ring(polygon)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    x1 = ring[:, 0][None, :]
    y1 = ring[:, 1][None, :]
    x2 = np.roll(ring[:, 0], -1)[None, :]
    y2 = np.roll(ring[:, 1], -1)[None, :]
    straddles = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = (x2 - x1) * (y - y1) / (y2 - y1) + x1
    crossings = straddles & (x < x_cross)
    inside = (np.count_nonzero(crossings, axis=1) % 2).astype(bool)
    on_boundary = _edge_distances(pts, ring) <= _BOUNDARY_TOL
    return inside | on_boundary


def point_in_polygon(q, polygon) -> bool:
    """Even-odd containment of a single point; boundary counts inside."""
    return bool(points_in_polygon(np.asarray(q, dtype=float)[None, :], polygon)[0])


def rectangle_corners(center, orientation: float, length: float, width: float) -> np.ndarray:
    """Corners of an oriented rectangle, counter-clockwise.

    `length` extends along the orientation axis, `width` across it.
    """
    frame = LocalFrame(np.asarray(center, dtype=float), float(orientation))
    half_l = 0.5 * float(length)
    half_w = 0.5 * float(width)
    local = np.array(
        [
            [half_l, half_w],
            [-half_l, half_w],
            [-half_l, -half_w],
            [half_l, -half_w],
        ]
    )
    return frame.from_local(local)


def rectangle_polygon_overlap(
    center, orientation: float, length: float, width: float, polygon
) -> bool:
    """True iff the oriented rectangle and the polygon share any point.

    Covers partial overlap, edge crossings and full containment in
    either direction.
    """
    ring = _as_ring(polygon)
    if length < 0.0 or width < 0.0:
        raise GeometryError("rectangle sides must be non-negative")
    corners = rectangle_corners(center, orientation, length, width)
    if points_in_polygon(corners, ring).any():
        return True
    frame = LocalFrame(np.asarray(center, dtype=float), float(orientation))
    local = frame.to_local(ring)
    half_l = 0.5 * float(length) + _BOUNDARY_TOL
    half_w = 0.5 * float(width) + _BOUNDARY_TOL
    if (
        (np.abs(local[:, 0]) <= half_l) & (np.abs(local[:, 1]) <= half_w)
    ).any():
        return True
    closed = np.vstack([ring, ring[:1]])
    for i in range(4):
        r1 = corners[i]
        r2 = corners[(i + 1) % 4]
        for j in range(len(ring)):
            if segment_intersection(r1, r2, closed[j], closed[j + 1]) is not None:
                return True
    return False
