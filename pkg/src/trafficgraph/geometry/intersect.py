"""Segment and polyline intersection.

Crossings are reported with their arclength along each polyline so that
callers can reason about *where* two paths meet, not just whether they
do.  Collinear overlapping segments collapse to a single representative
hit at the midpoint of the shared stretch, keeping downstream consumers
that expect isolated crossing points well defined.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polyline import Polyline

__all__ = ["PolylineCrossing", "polyline_intersection", "segment_intersection"]

# Two hits closer than this along both polylines are the same crossing
# seen from adjacent segments (e.g. a crossing exactly at a vertex).
_DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class PolylineCrossing:
    """One intersection of two polylines."""

    arclength_a: float
    arclength_b: float
    point: np.ndarray


def segment_intersection(p1, p2, q1, q2):
    """Intersection of segments p1-p2 and q1-q2.

    Returns ``(t, v, point)`` with parameters in [0, 1] along each
    segment, or None when they do not touch.  Collinear overlap returns
    the midpoint of the overlapping stretch.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    r = p2 - p1
    s = q2 - q1
    denom = r[0] * s[1] - r[1] * s[0]
    w = q1 - p1
    if denom != 0.0:
        t = (w[0] * s[1] - w[1] * s[0]) / denom
        v = (w[0] * r[1] - w[1] * r[0]) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= v <= 1.0:
            return t, v, p1 + t * r
        return None
    # Parallel.  Only collinear segments can still touch.
    if w[0] * r[1] - w[1] * r[0] != 0.0:
        return None
    rr = float(r @ r)
    ta = float(w @ r) / rr
    tb = float((q2 - p1) @ r) / rr
    lo = max(0.0, min(ta, tb))
    hi = min(1.0, max(ta, tb))
    if lo > hi:
        return None
    t = 0.5 * (lo + hi)
    point = p1 + t * r
    # Parameter of `point` along q1-q2 (degenerate overlap included).
    if ta != tb:
        v = (t - ta) / (tb - ta)
    else:
        v = 0.0
    return t, min(max(v, 0.0), 1.0), point


def polyline_intersection(a: Polyline, b: Polyline) -> list[PolylineCrossing]:
    """All crossings of `a` with `b`, sorted by arclength along `a`.

    Each geometric crossing appears once even when it falls exactly on a
    vertex shared by two consecutive segments.
    """
    pa = a.points
    pb = b.points
    # Pairwise bounding-box prefilter over all segment pairs.
    a_lo = np.minimum(pa[:-1], pa[1:])
    a_hi = np.maximum(pa[:-1], pa[1:])
    b_lo = np.minimum(pb[:-1], pb[1:])
    b_hi = np.maximum(pb[:-1], pb[1:])
    overlap = np.all(
        (a_lo[:, None, :] <= b_hi[None, :, :])
        & (b_lo[None, :, :] <= a_hi[:, None, :]),
        axis=2,
    )
    cum_a = a.cumulative_lengths
    cum_b = b.cumulative_lengths
    len_a = a.segment_lengths
    len_b = b.segment_lengths

    hits: list[PolylineCrossing] = []
    for i, j in zip(*np.nonzero(overlap)):
        found = segment_intersection(pa[i], pa[i + 1], pb[j], pb[j + 1])
        if found is None:
            continue
        t, v, point = found
        s_a = float(cum_a[i] + t * len_a[i])
        s_b = float(cum_b[j] + v * len_b[j])
        if any(
            abs(s_a - h.arclength_a) <= _DEDUP_TOL
            and abs(s_b - h.arclength_b) <= _DEDUP_TOL
            for h in hits
        ):
            continue
        hits.append(PolylineCrossing(s_a, s_b, point))
    hits.sort(key=lambda h: (h.arclength_a, h.arclength_b))
    return hits
