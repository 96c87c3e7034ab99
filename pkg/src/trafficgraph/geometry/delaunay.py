"""Delaunay neighbour pairs with deterministic degeneracy handling.

The triangulation is built in two phases over the lexicographically
sorted unique points: a left-to-right scan that attaches each new point
to every strictly visible hull edge, followed by Lawson flips until all
interior edges pass the (tie-broken) incircle test.  Exact cocircular
ties are resolved by the symbolic perturbation in ``predicates``, keyed
on lexicographic rank, so the edge set is a pure function of the point
*set* — permuting the input cannot change it.

Degenerate inputs degrade gracefully instead of erroring:

* duplicate coordinates are triangulated once and the resulting edges
  are mapped back to every aliased index (coincident points also pair
  with each other — any circle through the shared location has no third
  point strictly inside);
* fewer than ``min_count`` unique points yield the complete graph;
* fully collinear points yield the chain of lexicographic neighbours,
  which is exactly the empty-circle adjacency for points on a line.
"""
from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from ..errors import GeometryError
from .predicates import incircle_ranked, orient2d

__all__ = ["delaunay_neighbors"]


def delaunay_neighbors(points, min_count: int = 3) -> set[tuple[int, int]]:
    """Undirected Delaunay edge set as ``(i, j)`` index pairs with i < j."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected (n, 2) points, got shape {pts.shape}")
    if pts.size and not np.isfinite(pts).all():
        raise GeometryError("points must be finite")
    n = len(pts)
    if n < 2:
        return set()

    groups: dict[tuple[float, float], list[int]] = {}
    for i, (x, y) in enumerate(pts):
        groups.setdefault((float(x), float(y)), []).append(i)
    reps = sorted(groups)  # lexicographic: canonical rank == list position
    u = len(reps)

    if u == 1:
        rep_edges: set[tuple[int, int]] = set()
    elif u < min_count:
        rep_edges = set(itertools.combinations(range(u), 2))
    elif all(orient2d(reps[0], reps[1], reps[k]) == 0 for k in range(2, u)):
        rep_edges = {(k, k + 1) for k in range(u - 1)}
    else:
        rep_edges = _triangulate(reps)

    members = [groups[r] for r in reps]
    out: set[tuple[int, int]] = set()
    for ids in members:
        out.update(itertools.combinations(ids, 2))
    for i, j in rep_edges:
        out.update(
            (a, b) if a < b else (b, a)
            for a in members[i]
            for b in members[j]
        )
    return out


def _triangulate(reps: list[tuple[float, float]]) -> set[tuple[int, int]]:
    """Edges of the Delaunay triangulation of ≥3 distinct, lex-sorted,
    not-all-collinear points; indices refer to positions in `reps`."""
    u = len(reps)
    tris: dict[int, tuple[int, int, int]] = {}
    edge_tris: dict[frozenset, set[int]] = defaultdict(set)
    next_id = 0

    def add_tri(a: int, b: int, c: int) -> None:
        nonlocal next_id
        tid = next_id
        next_id += 1
        tris[tid] = (a, b, c)
        for e in ((a, b), (b, c), (c, a)):
            edge_tris[frozenset(e)].add(tid)

    def remove_tri(tid: int) -> None:
        a, b, c = tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            key = frozenset(e)
            owners = edge_tris[key]
            owners.discard(tid)
            if not owners:
                del edge_tris[key]

    # Scan phase.  Points sharing the line through the first two form a
    # pending chain that fans out to the first off-line point; afterwards
    # every new point attaches to the strictly visible hull arc.
    chain = [0, 1]
    apex = 2
    while orient2d(reps[0], reps[1], reps[apex]) == 0:
        chain.append(apex)
        apex += 1
    side = orient2d(reps[chain[0]], reps[chain[1]], reps[apex])
    for a, b in zip(chain, chain[1:]):
        if side > 0:
            add_tri(a, b, apex)
        else:
            add_tri(b, a, apex)
    # Counter-clockwise hull of everything inserted so far.
    hull = chain + [apex] if side > 0 else list(reversed(chain)) + [apex]

    for p in range(apex + 1, u):
        pt = reps[p]
        h = len(hull)
        vis = [
            orient2d(reps[hull[i]], reps[hull[(i + 1) % h]], pt) < 0
            for i in range(h)
        ]
        if all(vis) or not any(vis):
            raise GeometryError("hull visibility scan failed")
        start = next(
            i for i in range(h) if vis[i] and not vis[(i - 1) % h]
        )
        arc = []
        i = start
        while vis[i]:
            arc.append(i)
            i = (i + 1) % h
        for e in arc:
            a, b = hull[e], hull[(e + 1) % h]
            add_tri(b, a, p)  # p is strictly right of a->b, so b,a,p is CCW
        # Interior vertices of the visible arc leave the hull; p takes
        # the arc's place between its two surviving endpoints.
        first = start
        last = (arc[-1] + 1) % h
        new_hull = [hull[last]]
        i = last
        while i != first:
            i = (i + 1) % h
            new_hull.append(hull[i])
        new_hull.append(p)
        hull = new_hull

    # Flip phase: Lawson's algorithm.  The perturbed incircle test never
    # returns 0 for a valid triangle, flips strictly lower the lifted
    # surface, and the perturbed point set has a unique triangulation, so
    # this terminates with an order-independent result.
    stack = [key for key, owners in edge_tris.items() if len(owners) == 2]
    while stack:
        key = stack.pop()
        owners = edge_tris.get(key)
        if owners is None or len(owners) != 2:
            continue
        t1, t2 = sorted(owners)
        a, b, c = tris[t1]
        if frozenset((a, b)) == key:
            i, j, k = a, b, c
        elif frozenset((b, c)) == key:
            i, j, k = b, c, a
        else:
            i, j, k = c, a, b
        lv = next(v for v in tris[t2] if v not in key)
        if incircle_ranked(reps[i], reps[j], reps[k], reps[lv], (i, j, k, lv)) > 0:
            remove_tri(t1)
            remove_tri(t2)
            add_tri(i, lv, k)
            add_tri(lv, j, k)
            stack.extend(
                frozenset(e) for e in ((i, lv), (lv, j), (j, k), (k, i))
            )

    return {tuple(sorted(key)) for key in edge_tris}
