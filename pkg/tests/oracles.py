"""Independent brute-force reference implementations used by the tests.

Nothing in here calls into the package's geometry code paths: every
oracle recomputes its answer from first principles (dense sampling,
exhaustive enumeration, exact rational arithmetic) so that agreement is
meaningful.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def dense_min_distances(points, queries, resolution: float = 1e-4) -> np.ndarray:
    """Min distance from each query to a polyline, by dense sampling.

    Each segment is sampled at `resolution` spacing including both of its
    endpoints; no projection is involved, so this shares no logic with
    the code under test.  The sampled minimum overshoots the true one by
    at most resolution^2 / (8 * distance), i.e. well under 1e-6 m for
    queries a few millimetres or more away.
    """
    pts = np.asarray(points, dtype=float)
    qs = np.atleast_2d(np.asarray(queries, dtype=float))
    chunks = []
    for p0, p1 in zip(pts[:-1], pts[1:]):
        steps = max(1, int(np.ceil(np.hypot(*(p1 - p0)) / resolution)))
        frac = np.linspace(0.0, 1.0, steps + 1)
        chunks.append(p0 + frac[:, None] * (p1 - p0))
    samples = np.vstack(chunks)
    d2 = (
        (samples[:, 0][None, :] - qs[:, 0][:, None]) ** 2
        + (samples[:, 1][None, :] - qs[:, 1][:, None]) ** 2
    )
    return np.sqrt(d2.min(axis=1))


def brute_force_crossings(points_a, points_b, tol: float = 1e-12):
    """All transversal segment-pair crossings of two polylines.

    Solves the 2x2 linear system for every segment pair with
    numpy.linalg, skipping (near-)parallel pairs.  Returns a list of
    (arclength_a, arclength_b, point) sorted by arclength_a, crossings
    closer than 1e-9 on both polylines merged.
    """
    pa = np.asarray(points_a, dtype=float)
    pb = np.asarray(points_b, dtype=float)
    cum_a = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pa, axis=0).T))])
    cum_b = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pb, axis=0).T))])
    hits = []
    for i in range(len(pa) - 1):
        for j in range(len(pb) - 1):
            r = pa[i + 1] - pa[i]
            s = pb[j + 1] - pb[j]
            mat = np.column_stack([r, -s])
            if abs(np.linalg.det(mat)) < tol:
                continue
            t, v = np.linalg.solve(mat, pb[j] - pa[i])
            if -tol <= t <= 1.0 + tol and -tol <= v <= 1.0 + tol:
                s_a = cum_a[i] + t * np.hypot(*r)
                s_b = cum_b[j] + v * np.hypot(*s)
                if not any(
                    abs(s_a - h[0]) <= 1e-9 and abs(s_b - h[1]) <= 1e-9
                    for h in hits
                ):
                    hits.append((float(s_a), float(s_b), pa[i] + t * r))
    hits.sort(key=lambda h: (h[0], h[1]))
    return hits


def empty_circle_pairs(points) -> set[tuple[int, int]]:
    """Pairs (i, j) admitting a circle through both with no point strictly inside.

    Circles through p_i and p_j are parameterised by the signed offset t
    of their centre along the perpendicular bisector.  Point k lies
    strictly inside circle(t) iff a_k + t*b_k < 0 with rational a_k, b_k,
    so the pair qualifies iff the linear constraint system a_k + t*b_k >= 0
    (for all k) is feasible.  Exact over Fractions.
    """
    pts = [(Fraction(float(x)), Fraction(float(y))) for x, y in np.asarray(points)]
    n = len(pts)
    out: set[tuple[int, int]] = set()
    for i, j in itertools.combinations(range(n), 2):
        (xi, yi), (xj, yj) = pts[i], pts[j]
        dx, dy = xj - xi, yj - yi
        if dx == 0 and dy == 0:
            # Coincident sites: an arbitrarily small circle through the
            # shared location keeps every other point outside or on it.
            out.add((i, j))
            continue
        mx, my = (xi + xj) / 2, (yi + yj) / 2
        ux, uy = -dy, dx  # (non-unit) bisector direction is fine: rescales t
        feasible = True
        lo, hi = None, None  # None = unbounded
        for k in range(n):
            if k in (i, j):
                continue
            xk, yk = pts[k]
            a = (xk * xk + yk * yk - xi * xi - yi * yi) - 2 * (
                (xk - xi) * mx + (yk - yi) * my
            )
            b = -2 * ((xk - xi) * ux + (yk - yi) * uy)
            if b == 0:
                if a < 0:
                    feasible = False
                    break
            elif b > 0:
                bound = -a / b
                if lo is None or bound > lo:
                    lo = bound
            else:
                bound = -a / b
                if hi is None or bound < hi:
                    hi = bound
        if feasible and (lo is None or hi is None or lo <= hi):
            out.add((i, j))
    return out


def polygon_contains(ring, points) -> np.ndarray:
    """Crossing-number containment via matplotlib; boundary unreliable.

    Only use for points a safe distance away from the polygon edges.
    """
    from matplotlib.path import Path

    ring = np.asarray(ring, dtype=float)
    path = Path(np.vstack([ring, ring[:1]]), closed=True)
    return path.contains_points(np.atleast_2d(points))


def sample_rectangle(rng, center, orientation, length, width, count=100_000):
    """Uniform samples over an oriented rectangle (world coordinates)."""
    local = rng.uniform(-0.5, 0.5, size=(count, 2)) * (length, width)
    c, s = np.cos(orientation), np.sin(orientation)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.asarray(center, dtype=float)
