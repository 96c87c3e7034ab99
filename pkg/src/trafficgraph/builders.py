"""Lanelet-to-lanelet and vehicle-to-lanelet edge construction.

Map relations are derived from declared topology (predecessor/successor,
lateral adjacency), from shared endpoints (merging/diverging), and from
centerline crossings (conflicting).  Each edge record carries the
arclength where the relation acts on either lanelet, plus a numeric
relation code.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ConfigError
from .geometry import point_in_polygon, polyline_intersection, \
    rectangle_polygon_overlap
from .scenario import Lanelet, Scenario

__all__ = [
    "ALL_L2L_TYPES",
    "L2L_TYPE_CODES",
    "L2LEdge",
    "build_l2l_edges",
    "build_v2l_edges",
    "mirror_v2l_edges",
]

#: relation type -> adjacency code stored in the edge feature row
L2L_TYPE_CODES = {
    "predecessor": 0,
    "successor": 1,
    "adjacent_left": 2,
    "adjacent_right": 3,
    "merging": 4,
    "diverging": 5,
    "conflicting": 6,
}
ALL_L2L_TYPES = frozenset(L2L_TYPE_CODES)


@dataclass(frozen=True)
class L2LEdge:
    source: int
    target: int
    code: int
    source_arclength: float
    target_arclength: float

    def as_record(self) -> tuple:
        return (self.source, self.target, self.code,
                self.source_arclength, self.target_arclength)


def _check_types(enabled: Optional[Iterable]) -> frozenset:
    if enabled is None:
        return ALL_L2L_TYPES
    enabled = frozenset(enabled)
    unknown = enabled - ALL_L2L_TYPES
    if unknown:
        raise ConfigError(
            f"unknown lanelet relation type(s): {sorted(unknown)}",
            problems=[f"unknown lanelet relation type {t!r}"
                      for t in sorted(unknown)],
        )
    return enabled


def build_l2l_edges(scenario: Scenario,
                    enabled_types: Optional[Iterable] = None) -> list:
    """All enabled lanelet relations as L2LEdge records.

    Conflicting edges are only drawn between lanelet pairs with no other
    relation in either direction — the exclusion considers every
    relation type, independent of which ones are enabled, so enabling
    fewer types always yields a subset of the full edge set.
    """
    enabled = _check_types(enabled_types)
    lanelets = scenario.lanelets
    edges = []
    #: unordered id pairs related by anything other than "conflicting"
    related = set()

    def relate(a: int, b: int):
        related.add((min(a, b), max(a, b)))

    for lanelet in lanelets.values():
        for succ_id in sorted(lanelet.successors):
            succ = lanelets[succ_id]
            relate(lanelet.id, succ_id)
            edges.append(L2LEdge(lanelet.id, succ_id,
                                 L2L_TYPE_CODES["successor"],
                                 lanelet.length, 0.0))
            edges.append(L2LEdge(succ_id, lanelet.id,
                                 L2L_TYPE_CODES["predecessor"],
                                 0.0, lanelet.length))
        for side, refs in (("adjacent_left", lanelet.adjacent_left),
                           ("adjacent_right", lanelet.adjacent_right)):
            for ref in refs:
                neighbor = lanelets[ref.lanelet_id]
                relate(lanelet.id, neighbor.id)
                edges.append(L2LEdge(lanelet.id, neighbor.id,
                                     L2L_TYPE_CODES[side],
                                     lanelet.length / 2.0,
                                     neighbor.length / 2.0))

    # Merging: distinct lanelets sharing a successor, joined at their ends.
    # Diverging: sharing a predecessor, joined at their starts.
    ids = sorted(lanelets)
    for i, a_id in enumerate(ids):
        for b_id in ids[i + 1:]:
            a, b = lanelets[a_id], lanelets[b_id]
            if a.successors & b.successors:
                relate(a_id, b_id)
                for src, dst in ((a, b), (b, a)):
                    edges.append(L2LEdge(src.id, dst.id,
                                         L2L_TYPE_CODES["merging"],
                                         src.length, dst.length))
            if a.predecessors & b.predecessors:
                relate(a_id, b_id)
                for src, dst in ((a, b), (b, a)):
                    edges.append(L2LEdge(src.id, dst.id,
                                         L2L_TYPE_CODES["diverging"],
                                         0.0, 0.0))

    for i, a_id in enumerate(ids):
        for b_id in ids[i + 1:]:
            if (a_id, b_id) in related:
                continue
            a, b = lanelets[a_id], lanelets[b_id]
            crossings = polyline_intersection(a.center, b.center)
            if not crossings:
                continue
            # First crossing as seen from each side; they can differ when
            # the centerlines cross more than once.
            first_a = min(crossings, key=lambda c: (c.arclength_a,
                                                    c.arclength_b))
            first_b = min(crossings, key=lambda c: (c.arclength_b,
                                                    c.arclength_a))
            edges.append(L2LEdge(a_id, b_id, L2L_TYPE_CODES["conflicting"],
                                 first_a.arclength_a, first_a.arclength_b))
            edges.append(L2LEdge(b_id, a_id, L2L_TYPE_CODES["conflicting"],
                                 first_b.arclength_b, first_b.arclength_a))

    enabled_codes = {L2L_TYPE_CODES[t] for t in enabled}
    kept = [e for e in edges if e.code in enabled_codes]
    kept.sort(key=lambda e: (e.source, e.target, e.code))
    return kept


def build_v2l_edges(vehicles: Sequence[tuple],
                    lanelets: Mapping[int, Lanelet],
                    strategy: str = "center") -> list:
    """(vehicle id, lanelet id) assignments, sorted.

    `center` assigns a vehicle to every lanelet whose boundary polygon
    contains its center point; `shape` additionally catches any overlap
    between the vehicle's footprint rectangle and the lanelet polygon,
    so its result is always a superset of `center`'s.
    """
    if strategy not in ("center", "shape"):
        raise ConfigError(f"unknown vehicle-to-lanelet strategy {strategy!r}")
    pairs = []
    for obstacle, state in vehicles:
        for lanelet_id in sorted(lanelets):
            lanelet = lanelets[lanelet_id]
            polygon = lanelet.polygon()
            if point_in_polygon(state.position, polygon):
                pairs.append((obstacle.id, lanelet_id))
            elif strategy == "shape" and rectangle_polygon_overlap(
                state.position, state.orientation,
                obstacle.length, obstacle.width, polygon,
            ):
                pairs.append((obstacle.id, lanelet_id))
    pairs.sort()
    return pairs


def mirror_v2l_edges(pairs: Sequence[tuple]) -> list:
    """Reversed (lanelet id, vehicle id) pairs, keeping the input order.

    Keeping the order lets the lanelet-to-vehicle store reuse the
    vehicle-to-lanelet feature matrix unchanged.
    """
    return [(lanelet_id, vehicle_id) for vehicle_id, lanelet_id in pairs]
