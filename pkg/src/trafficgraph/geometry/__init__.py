"""Computational-geometry kernels used throughout the package.

Everything here is a pure function (or an immutable value type), so the
whole subpackage is safe to use from worker processes.
"""
from .angles import angle_diff, wrap_angle
from .delaunay import delaunay_neighbors
from .frames import LocalFrame, rotate, rotation_matrix
from .intersect import PolylineCrossing, polyline_intersection, segment_intersection
from .polygons import (
    point_in_polygon,
    points_in_polygon,
    rectangle_corners,
    rectangle_polygon_overlap,
)
from .polyline import (
    ArclengthProjection,
    Polyline,
    point_at_arclength,
    polyline_length,
    project_point,
)
from .predicates import incircle, incircle_ranked, orient2d

__all__ = [
    "ArclengthProjection",
    "LocalFrame",
    "Polyline",
    "PolylineCrossing",
    "angle_diff",
    "delaunay_neighbors",
    "incircle",
    "incircle_ranked",
    "orient2d",
    "point_at_arclength",
    "point_in_polygon",
    "points_in_polygon",
    "polyline_intersection",
    "polyline_length",
    "project_point",
    "rectangle_corners",
    "rectangle_polygon_overlap",
    "rotate",
    "rotation_matrix",
    "segment_intersection",
    "wrap_angle",
]
