"""Scenario transforms, their `>>` composition, and graph postprocessors.

A chain applies preprocessors and filters left to right; the first
rejecting filter short-circuits the scenario to "excluded" (None).
Postprocessors run on finished graph instances and are revalidated
against the structural graph invariants after every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ConfigError, GraphInvariantError, PipelineError
from .geometry import Polyline
from .graph import EdgeStore, NodeStore, TrafficGraph, validate_graph
from .scenario import AdjacentRef, Lanelet, Scenario

__all__ = [
    "Filter",
    "Postprocessor",
    "Preprocessor",
    "ScenarioTransform",
    "SegmentLanelets",
    "TrafficFilter",
    "TransformChain",
    "apply_postprocessors",
    "remove_vehicle_nodes",
]


class ScenarioTransform:
    """Base of chainable scenario-level operations."""

    kind = "preprocessor"

    @property
    def name(self) -> str:
        return type(self).__name__

    def parameters(self) -> dict:
        return {}

    def __rshift__(self, other):
        return TransformChain((self,)) >> other


class Preprocessor(ScenarioTransform):
    kind = "preprocessor"

    def apply(self, scenario: Scenario) -> Scenario:
        raise NotImplementedError


class Filter(ScenarioTransform):
    kind = "filter"

    def accepts(self, scenario: Scenario) -> bool:
        raise NotImplementedError


class TransformChain:
    """Ordered transforms applied left-to-right."""

    def __init__(self, elements: Sequence[ScenarioTransform] = ()):
        self.elements = tuple(elements)
        for el in self.elements:
            if not isinstance(el, ScenarioTransform):
                raise ConfigError(f"not a scenario transform: {el!r}")

    def __rshift__(self, other):
        if isinstance(other, TransformChain):
            return TransformChain(self.elements + other.elements)
        return TransformChain(self.elements + (other,))

    def __rrshift__(self, other):
        return TransformChain((other,)) >> self

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __call__(self, scenario: Scenario) -> Optional[Scenario]:
        """Transformed scenario, or None once a filter rejects it."""
        for el in self.elements:
            try:
                if el.kind == "filter":
                    if not el.accepts(scenario):
                        return None
                else:
                    scenario = el.apply(scenario)
            except PipelineError:
                raise
            except Exception as exc:
                raise PipelineError(f"transform {el.name!r} failed: {exc}") from exc
        return scenario

    def describe(self) -> list:
        return [{"name": el.name, "parameters": el.parameters()}
                for el in self.elements]


class TrafficFilter(Filter):
    """Accept scenarios with at least `min` vehicles."""

    def __init__(self, min: int):
        if min < 0:
            raise ConfigError(f"minimum vehicle count must be >= 0, got {min}")
        self.min = int(min)

    def parameters(self) -> dict:
        return {"min": self.min}

    def accepts(self, scenario: Scenario) -> bool:
        return len(scenario.obstacles) >= self.min


def _insert_midpoints(points: np.ndarray, target: int) -> np.ndarray:
    """Grow the vertex count to `target` by splitting the longest segment.

    Inserted points are segment midpoints, so the traced curve — and its
    arclength — is unchanged.
    """
    pts = np.asarray(points, np.float64)
    while len(pts) < target:
        lengths = np.hypot(*(pts[1:] - pts[:-1]).T)
        i = int(np.argmax(lengths))
        mid = 0.5 * (pts[i] + pts[i + 1])
        pts = np.insert(pts, i + 1, mid, axis=0)
    return pts


def _split_bound(bound: Polyline, cut_points: np.ndarray, n_seg: int) -> list:
    """Split a boundary at the arclengths of the projected cut points.

    Projections can collapse or reorder on strongly curved bounds; the
    fallback is a proportional split, which always produces `n_seg`
    valid pieces.
    """
    arcs = [bound.project(p).arclength for p in cut_points]
    lo = 0.0
    usable = True
    for s in arcs + [bound.length]:
        if not s > lo + 1e-9:
            usable = False
            break
        lo = s
    if not usable:
        arcs = [k * bound.length / n_seg for k in range(1, n_seg)]
    return bound.split_at(arcs)


@dataclass(frozen=True)
class _Interval:
    """Normalized arclength span [lo, hi] of a segment inside its parent."""

    lo: float
    hi: float

    def flipped(self) -> "_Interval":
        return _Interval(1.0 - self.hi, 1.0 - self.lo)

    def overlaps(self, other: "_Interval") -> bool:
        return (min(self.hi, other.hi) - max(self.lo, other.lo)) > 1e-9


class SegmentLanelets(Preprocessor):
    """Split long lanelets into equal-arclength consecutive segments.

    Every lanelet longer than `size` becomes ceil(length/size) segments
    chained by successor/predecessor references.  References of other
    lanelets are remapped (successor refs to the first segment,
    predecessor refs to the last); lateral adjacency is remapped to
    every neighbor segment covering an overlapping arclength interval,
    flipping the interval for opposite-direction neighbors.
    """

    def __init__(self, size: float):
        if not size > 0:
            raise ConfigError(f"segment size must be > 0, got {size}")
        self.size = float(size)

    def parameters(self) -> dict:
        return {"size": self.size}

    def apply(self, scenario: Scenario) -> Scenario:
        pieces: dict = {}    # original id -> list of (new id, bounds triple)
        intervals: dict = {} # original id -> list of _Interval
        next_id = max(scenario.lanelets, default=0) + 1

        for lanelet_id in sorted(scenario.lanelets):
            lanelet = scenario.lanelets[lanelet_id]
            n_seg = math.ceil(lanelet.length / self.size)
            if n_seg <= 1:
                pieces[lanelet_id] = [(lanelet_id, None)]
                intervals[lanelet_id] = [_Interval(0.0, 1.0)]
                continue
            step = lanelet.length / n_seg
            cuts = [k * step for k in range(1, n_seg)]
            cut_points = np.array([lanelet.center.point_at(s)[0] for s in cuts])
            centers = lanelet.center.split_at(cuts)
            lefts = _split_bound(lanelet.left_bound, cut_points, n_seg)
            rights = _split_bound(lanelet.right_bound, cut_points, n_seg)
            segment_ids = list(range(next_id, next_id + n_seg))
            next_id += n_seg
            pieces[lanelet_id] = [
                (sid, (left, right, center))
                for sid, left, right, center
                in zip(segment_ids, lefts, rights, centers)
            ]
            bounds = [0.0] + cuts + [lanelet.length]
            intervals[lanelet_id] = [
                _Interval(bounds[k] / lanelet.length,
                          bounds[k + 1] / lanelet.length)
                for k in range(n_seg)
            ]

        def first_of(original_id: int) -> int:
            return pieces[original_id][0][0]

        def last_of(original_id: int) -> int:
            return pieces[original_id][-1][0]

        def lateral_refs(refs, own_interval: _Interval) -> tuple:
            out = []
            for ref in refs:
                neighbor_pieces = pieces[ref.lanelet_id]
                neighbor_intervals = intervals[ref.lanelet_id]
                for (nid, _), interval in zip(neighbor_pieces,
                                              neighbor_intervals):
                    if not ref.same_direction:
                        interval = interval.flipped()
                    if own_interval.overlaps(interval):
                        out.append(AdjacentRef(nid, ref.same_direction))
            return tuple(out)

        lanelets = {}
        for lanelet_id in sorted(scenario.lanelets):
            lanelet = scenario.lanelets[lanelet_id]
            parts = pieces[lanelet_id]
            n_seg = len(parts)
            for k, (new_id, geometry) in enumerate(parts):
                if geometry is None:
                    left, right, center = (lanelet.left_bound,
                                           lanelet.right_bound,
                                           lanelet.center)
                else:
                    left, right, center = geometry
                    count = max(len(left.points), len(right.points),
                                len(center.points))
                    left = Polyline(_insert_midpoints(left.points, count))
                    right = Polyline(_insert_midpoints(right.points, count))
                    center = Polyline(_insert_midpoints(center.points, count))
                if k == 0:
                    predecessors = frozenset(
                        last_of(p) for p in lanelet.predecessors
                    )
                else:
                    predecessors = frozenset({parts[k - 1][0]})
                if k == n_seg - 1:
                    successors = frozenset(
                        first_of(s) for s in lanelet.successors
                    )
                else:
                    successors = frozenset({parts[k + 1][0]})
                own = intervals[lanelet_id][k]
                lanelets[new_id] = Lanelet(
                    new_id, left, right, center,
                    predecessors=predecessors,
                    successors=successors,
                    adjacent_left=lateral_refs(lanelet.adjacent_left, own),
                    adjacent_right=lateral_refs(lanelet.adjacent_right, own),
                )
        return Scenario(scenario.id, scenario.dt, lanelets, scenario.obstacles)


@runtime_checkable
class Postprocessor(Protocol):
    """Deferred graph-level rewrite applied after extraction."""

    name: str

    def __call__(self, graph: TrafficGraph) -> TrafficGraph: ...


def apply_postprocessors(postprocessors: Sequence[Postprocessor],
                         graph: TrafficGraph) -> TrafficGraph:
    """Run postprocessors in order, revalidating after each one."""
    for post in postprocessors:
        name = getattr(post, "name", type(post).__name__)
        try:
            graph = post(graph)
        except Exception as exc:
            raise PipelineError(f"postprocessor {name!r} failed: {exc}") from exc
        try:
            validate_graph(graph)
        except GraphInvariantError as exc:
            raise PipelineError(
                f"postprocessor {name!r} produced an invalid graph: {exc}"
            ) from exc
    return graph


def remove_vehicle_nodes(graph: TrafficGraph, drop_rows) -> TrafficGraph:
    """Copy of the graph without the given vehicle rows.

    Edges touching a removed vehicle disappear; surviving endpoint
    indices are compacted to the new row numbering.
    """
    vstore = graph.nodes["v"]
    drop = set(int(r) for r in drop_rows)
    keep = [i for i in range(len(vstore)) if i not in drop]
    remap = {old: new for new, old in enumerate(keep)}
    nodes = dict(graph.nodes)
    nodes["v"] = NodeStore(
        "v", vstore.ids[keep], vstore.x[keep], vstore.channels,
        metadata={k: v[keep] for k, v in vstore.metadata.items()},
    )
    edges = {}
    for relation, store in graph.edges.items():
        src_is_v = relation in ("v2v", "v2l", "vtv")
        dst_is_v = relation in ("v2v", "l2v", "vtv")
        if not (src_is_v or dst_is_v) or not len(store):
            edges[relation] = store
            continue
        src, dst = store.edge_index
        mask = np.ones(len(store), bool)
        if src_is_v:
            mask &= np.array([int(s) in remap for s in src], bool)
        if dst_is_v:
            mask &= np.array([int(d) in remap for d in dst], bool)
        src = src[mask]
        dst = dst[mask]
        if src_is_v:
            src = np.array([remap[int(s)] for s in src], np.int64)
        if dst_is_v:
            dst = np.array([remap[int(d)] for d in dst], np.int64)
        edges[relation] = EdgeStore(
            relation,
            np.stack([src, dst]) if len(src) else np.empty((2, 0), np.int64),
            store.x[mask], store.channels,
        )
    return type(graph)(**graph._ctor_args(nodes=nodes, edges=edges))
