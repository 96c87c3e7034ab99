"""Polylines with cached arclength tables, plus projection and evaluation.

A polyline is an ordered sequence of at least two 2-D points with strictly
positive segment lengths. All queries (length, projection, evaluation at an
arclength) run on precomputed per-segment tables, so constructing a Polyline
once and querying it many times is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GeometryError

# Consecutive vertices closer than this are considered duplicates.
MIN_VERTEX_SPACING = 1e-9


class Polyline:
    """Immutable 2-D polyline.

    Parameters
    ----------
    points:
        (n, 2) array-like, n >= 2, consecutive points pairwise distinct.
    """

    __slots__ = ("points", "_seg_vec", "_seg_len", "_cumlen", "_seg_dir")

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeometryError(f"polyline points must be (n, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise GeometryError("polyline needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise GeometryError("polyline points must be finite")
        seg = np.diff(pts, axis=0)
        seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(seg_len <= MIN_VERTEX_SPACING):
            raise GeometryError("polyline has duplicate consecutive points")
        pts = pts.copy()
        pts.setflags(write=False)
        self.points = pts
        self._seg_vec = seg
        self._seg_len = seg_len
        self._cumlen = np.concatenate(([0.0], np.cumsum(seg_len)))
        self._seg_dir = None  # lazily computed unit tangents

    def __len__(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Polyline):
            return NotImplemented
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points
        )

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self):
        return f"Polyline({len(self)} pts, length={self.length:.3f})"

    @property
    def length(self) -> float:
        return float(self._cumlen[-1])

    @property
    def cumulative_lengths(self) -> np.ndarray:
        """Arclength at every vertex, starting at 0."""
        return self._cumlen

    @property
    def segment_lengths(self) -> np.ndarray:
        return self._seg_len

    @property
    def segment_directions(self) -> np.ndarray:
        if self._seg_dir is None:
            self._seg_dir = self._seg_vec / self._seg_len[:, None]
        return self._seg_dir

    def reversed(self) -> "Polyline":
        return Polyline(self.points[::-1])

    def segment_orientation(self, index: int) -> float:
        dx, dy = self._seg_vec[index]
        return float(np.arctan2(dy, dx))

    def _segment_index(self, s: float) -> tuple[int, float]:
        """Containing segment for a clamped arclength.

        At an interior vertex the outgoing segment wins; at the total length
        the last segment wins.
        """
        s = min(max(s, 0.0), self.length)
        idx = int(np.searchsorted(self._cumlen, s, side="right")) - 1
        idx = min(max(idx, 0), len(self._seg_len) - 1)
        return idx, s - self._cumlen[idx]

    def point_at(self, s: float) -> tuple[np.ndarray, float]:
        """Position and tangent orientation at arclength ``s`` (clamped)."""
        idx, local = self._segment_index(s)
        t = local / self._seg_len[idx]
        point = self.points[idx] + t * self._seg_vec[idx]
        return point, self.segment_orientation(idx)

    def project(self, q) -> "ArclengthProjection":
        """Orthogonal projection of a point onto the polyline.

        The foot point minimizes the distance over all segments; exact ties
        are broken toward the smallest arclength. ``signed_lateral`` is
        positive when ``q`` lies left of the local direction of travel.
        """
        q = np.asarray(q, dtype=float)
        rel = q[None, :] - self.points[:-1]
        t = np.einsum("ij,ij->i", rel, self._seg_vec) / (self._seg_len**2)
        t = np.clip(t, 0.0, 1.0)
        feet = self.points[:-1] + t[:, None] * self._seg_vec
        d2 = np.einsum("ij,ij->i", feet - q[None, :], feet - q[None, :])
        idx = int(np.argmin(d2))  # argmin returns the first (smallest-s) minimizer
        foot = feet[idx]
        arclength = float(self._cumlen[idx] + t[idx] * self._seg_len[idx])
        direction = self.segment_directions[idx]
        off = q - foot
        distance = float(np.sqrt(d2[idx]))
        cross = direction[0] * off[1] - direction[1] * off[0]
        # Magnitude equals the foot distance; the sign says which side of the
        # tangent the query point falls on (0 when dead ahead/behind an end).
        lateral = float(np.sign(cross)) * distance
        return ArclengthProjection(
            arclength=arclength,
            foot_point=foot,
            tangent_orientation=self.segment_orientation(idx),
            signed_lateral=lateral,
            distance=distance,
        )

    def split_at(self, arclengths) -> list["Polyline"]:
        """Cut into consecutive pieces at interior arclengths.

        ``arclengths`` must be strictly increasing and lie strictly inside
        (0, length). Cut points are inserted exactly; vertices closer than
        MIN_VERTEX_SPACING to a cut are merged into it, so piece lengths sum
        to the original length exactly up to roundoff.
        """
        cuts = [float(s) for s in arclengths]
        for a, b in zip(cuts, cuts[1:]):
            if b <= a:
                raise GeometryError("split arclengths must be strictly increasing")
        if cuts and (cuts[0] <= 0.0 or cuts[-1] >= self.length):
            raise GeometryError("split arclengths must be interior")
        bounds = [0.0] + cuts + [self.length]
        pieces = []
        for lo, hi in zip(bounds, bounds[1:]):
            pieces.append(Polyline(self._slice_points(lo, hi)))
        return pieces

    def _slice_points(self, lo: float, hi: float) -> np.ndarray:
        (p_lo, _), (p_hi, _) = self.point_at(lo), self.point_at(hi)
        inner = [
            self.points[i]
            for i in range(len(self))
            if lo + MIN_VERTEX_SPACING < self._cumlen[i] < hi - MIN_VERTEX_SPACING
        ]
        return np.asarray([p_lo, *inner, p_hi])


@dataclass(frozen=True)
class ArclengthProjection:
    """Result of projecting a point onto a polyline."""

    arclength: float
    foot_point: np.ndarray
    tangent_orientation: float
    signed_lateral: float
    distance: float


def polyline_length(p: Polyline) -> float:
    """Total Euclidean arclength (sum of segment lengths)."""
    return p.length


def project_point(p: Polyline, q) -> ArclengthProjection:
    return p.project(q)


def point_at_arclength(p: Polyline, s: float) -> tuple[np.ndarray, float]:
    return p.point_at(s)
