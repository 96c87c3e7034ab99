"""Rigid 2-D coordinate frames.

A frame is an origin plus an orientation; mapping into the frame
translates by ``-origin`` and rotates by ``-orientation``, so a point
sitting at ``origin`` and looking along ``orientation`` sees the world
with itself at (0, 0) facing +x.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LocalFrame", "rotate", "rotation_matrix"]


def rotation_matrix(angle: float) -> np.ndarray:
    """Counter-clockwise rotation matrix for `angle` radians."""
    c = np.cos(angle)
    s = np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=float)


def rotate(points, angle: float) -> np.ndarray:
    """Rotate one point or an (n, 2) batch counter-clockwise about the origin."""
    pts = np.asarray(points, dtype=float)
    return pts @ rotation_matrix(angle).T


@dataclass(frozen=True)
class LocalFrame:
    """Coordinate frame anchored at `origin` with +x along `orientation`."""

    origin: np.ndarray
    orientation: float
    _rot: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        origin = np.asarray(self.origin, dtype=float).reshape(2)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "orientation", float(self.orientation))
        object.__setattr__(self, "_rot", rotation_matrix(self.orientation))

    def to_local(self, points) -> np.ndarray:
        """World coordinates -> frame coordinates (single point or (n, 2))."""
        pts = np.asarray(points, dtype=float)
        return (pts - self.origin) @ self._rot  # right-multiply == rotate by -angle

    def from_local(self, points) -> np.ndarray:
        """Frame coordinates -> world coordinates (single point or (n, 2))."""
        pts = np.asarray(points, dtype=float)
        return pts @ self._rot.T + self.origin

    def to_local_angle(self, angle) -> np.ndarray:
        """World heading -> heading relative to the frame, wrapped to (-pi, pi]."""
        from .angles import wrap_angle

        return wrap_angle(np.asarray(angle, dtype=float) - self.orientation)

    def to_local_vector(self, vectors) -> np.ndarray:
        """Rotate direction vectors into the frame (no translation)."""
        return np.asarray(vectors, dtype=float) @ self._rot

    def from_local_vector(self, vectors) -> np.ndarray:
        """Rotate frame-relative direction vectors back into world axes."""
        return np.asarray(vectors, dtype=float) @ self._rot.T
