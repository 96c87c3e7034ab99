"""Vehicle interaction edge drawers.

Spatial drawers connect vehicles within one timestep from their center
positions (Voronoi/Delaunay neighborhood, k-nearest, fully connected,
or fixed radius), optionally pruned by a hard distance cutoff.  The
causal drawer connects realizations of the same vehicle forward in time
across a temporal window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .geometry import delaunay_neighbors

__all__ = ["V2V_KINDS", "V2VDrawerConfig", "VTVDrawerConfig",
           "draw_v2v", "draw_vtv_pairs"]

V2V_KINDS = ("voronoi", "k_nearest", "fully_connected", "radius")


@dataclass(frozen=True)
class V2VDrawerConfig:
    kind: str = "voronoi"
    k: int = 1
    radius: float = 50.0
    max_distance: Optional[float] = None

    def __post_init__(self):
        problems = []
        if self.kind not in V2V_KINDS:
            problems.append(
                f"unknown v2v drawer kind {self.kind!r}; "
                f"expected one of {list(V2V_KINDS)}"
            )
        if self.kind == "k_nearest" and self.k < 1:
            problems.append(f"k_nearest requires k >= 1, got {self.k}")
        if self.kind == "radius" and not self.radius > 0:
            problems.append(f"radius must be > 0, got {self.radius}")
        if self.max_distance is not None and not self.max_distance > 0:
            problems.append(
                f"max_distance must be > 0, got {self.max_distance}"
            )
        if problems:
            raise ConfigError("; ".join(problems), problems=problems)


@dataclass(frozen=True)
class VTVDrawerConfig:
    """`t_max` is the edge horizon in timesteps; None means "span the
    whole window" and is resolved against the cache size at extraction
    time."""

    t_max: Optional[int] = None

    def __post_init__(self):
        if self.t_max is not None and self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1, got {self.t_max}")


def draw_v2v(vehicles: Sequence[tuple], config: V2VDrawerConfig) -> list:
    """Directed (source id, target id) edges for one timestep.

    `vehicles` holds (id, position) entries with unique ids.  The output
    is sorted by (source id, target id); fewer than two vehicles yield
    no edges.
    """
    ids = [int(v) for v, _ in vehicles]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate vehicle ids passed to the edge drawer")
    if len(ids) < 2:
        return []
    positions = np.asarray([p for _, p in vehicles], np.float64)

    pairs = set()
    if config.kind == "voronoi":
        for i, j in delaunay_neighbors(positions):
            pairs.add((ids[i], ids[j]))
            pairs.add((ids[j], ids[i]))
    elif config.kind == "fully_connected":
        for i in range(len(ids)):
            for j in range(len(ids)):
                if i != j:
                    pairs.add((ids[i], ids[j]))
    elif config.kind == "radius":
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                if np.hypot(*(positions[i] - positions[j])) <= config.radius:
                    pairs.add((ids[i], ids[j]))
                    pairs.add((ids[j], ids[i]))
    elif config.kind == "k_nearest":
        # Edges run from each vehicle's k nearest others toward it, so
        # messages flow from the neighborhood into the ego vehicle.
        for i in range(len(ids)):
            ranked = sorted(
                (float(np.hypot(*(positions[i] - positions[j]))), ids[j])
                for j in range(len(ids)) if j != i
            )
            for _, neighbor_id in ranked[:config.k]:
                pairs.add((neighbor_id, ids[i]))
    else:  # pragma: no cover - config validation rejects unknown kinds
        raise ConfigError(f"unknown v2v drawer kind {config.kind!r}")

    if config.max_distance is not None and math.isfinite(config.max_distance):
        by_id = {v: positions[i] for i, v in enumerate(ids)}
        pairs = {
            (a, b) for a, b in pairs
            if np.hypot(*(by_id[a] - by_id[b])) <= config.max_distance
        }
    return sorted(pairs)


def draw_vtv_pairs(node_keys: Sequence[tuple], t_max: int) -> list:
    """Causal same-vehicle pairs over temporal (id, timestep) node keys.

    Returns ((id, t_old), (id, t_new)) with 0 < t_new − t_old ≤ t_max,
    sorted by vehicle id, then both timesteps.
    """
    if t_max < 1:
        raise ConfigError(f"t_max must be >= 1, got {t_max}")
    by_vehicle: dict = {}
    for vid, t in node_keys:
        by_vehicle.setdefault(int(vid), []).append(int(t))
    out = []
    for vid in sorted(by_vehicle):
        steps = sorted(by_vehicle[vid])
        for i, t_old in enumerate(steps):
            for t_new in steps[i + 1:]:
                if t_new - t_old > t_max:
                    break
                out.append(((vid, t_old), (vid, t_new)))
    return out
