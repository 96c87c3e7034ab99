"""Domain model for recorded traffic scenarios.

A scenario couples a lanelet road network with the trajectories of
dynamic obstacles (vehicles), sampled on a fixed time grid.  All model
values are immutable after construction and safe to share across
worker processes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .errors import ScenarioValidationError
from .geometry import Polyline, wrap_angle

__all__ = [
    "AdjacentRef",
    "DynamicObstacle",
    "Lanelet",
    "Scenario",
    "VehicleState",
    "derive_state_derivatives",
]


def _as_vec2(value, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(2)
    if not np.isfinite(arr).all():
        raise ScenarioValidationError(f"{what} must be finite, got {arr}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class VehicleState:
    """Kinematic state of one vehicle at one timestep.

    `acceleration` and `yaw_rate` may be absent in source data; see
    `derive_state_derivatives` for filling them by finite differences.
    """

    timestep: int
    position: np.ndarray
    orientation: float
    velocity: np.ndarray
    acceleration: Optional[np.ndarray] = None
    yaw_rate: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "timestep", int(self.timestep))
        object.__setattr__(self, "position", _as_vec2(self.position, "position"))
        object.__setattr__(self, "orientation", float(wrap_angle(self.orientation)))
        object.__setattr__(self, "velocity", _as_vec2(self.velocity, "velocity"))
        if self.acceleration is not None:
            object.__setattr__(
                self, "acceleration", _as_vec2(self.acceleration, "acceleration")
            )
        if self.yaw_rate is not None:
            object.__setattr__(self, "yaw_rate", float(self.yaw_rate))

    def __eq__(self, other):
        if not isinstance(other, VehicleState):
            return NotImplemented
        return (
            self.timestep == other.timestep
            and np.array_equal(self.position, other.position)
            and self.orientation == other.orientation
            and np.array_equal(self.velocity, other.velocity)
            and (
                (self.acceleration is None) == (other.acceleration is None)
                and (
                    self.acceleration is None
                    or np.array_equal(self.acceleration, other.acceleration)
                )
            )
            and self.yaw_rate == other.yaw_rate
        )


@dataclass(frozen=True)
class DynamicObstacle:
    """A vehicle with rectangular footprint and a recorded trajectory."""

    id: int
    length: float
    width: float
    trajectory: tuple

    _by_timestep: Mapping[int, VehicleState] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "trajectory", tuple(self.trajectory))
        if self.length <= 0.0 or self.width <= 0.0:
            raise ScenarioValidationError(
                f"obstacle {self.id}: shape must be positive, "
                f"got length={self.length}, width={self.width}"
            )
        if not self.trajectory:
            raise ScenarioValidationError(f"obstacle {self.id}: empty trajectory")
        steps = [s.timestep for s in self.trajectory]
        if any(b - a != 1 for a, b in zip(steps, steps[1:])):
            raise ScenarioValidationError(
                f"obstacle {self.id}: trajectory timesteps must be "
                f"contiguous and increasing, got {steps}"
            )
        object.__setattr__(
            self, "_by_timestep", MappingProxyType({s.timestep: s for s in self.trajectory})
        )

    @property
    def first_timestep(self) -> int:
        return self.trajectory[0].timestep

    @property
    def last_timestep(self) -> int:
        return self.trajectory[-1].timestep

    def state_at(self, timestep: int) -> Optional[VehicleState]:
        return self._by_timestep.get(timestep)


class AdjacentRef(NamedTuple):
    """Lateral neighbour reference of a lanelet."""

    lanelet_id: int
    same_direction: bool


def _as_adjacency(value) -> tuple:
    if value is None:
        return ()
    if isinstance(value, AdjacentRef):
        return (value,)
    return tuple(AdjacentRef(int(i), bool(d)) for i, d in value)


@dataclass(frozen=True)
class Lanelet:
    """An atomic lane segment bounded by left/right polylines.

    The centerline is the pointwise midpoint of the bounds unless given
    explicitly; either way all three polylines share one vertex count.
    Lateral adjacency is kept as a tuple of references: scenario files
    carry at most one per side, but lane segmentation may fan a side out
    to several overlapping neighbours.
    """

    id: int
    left_bound: Polyline
    right_bound: Polyline
    center: Optional[Polyline] = None
    predecessors: frozenset = frozenset()
    successors: frozenset = frozenset()
    adjacent_left: tuple = ()
    adjacent_right: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "predecessors", frozenset(map(int, self.predecessors)))
        object.__setattr__(self, "successors", frozenset(map(int, self.successors)))
        object.__setattr__(self, "adjacent_left", _as_adjacency(self.adjacent_left))
        object.__setattr__(self, "adjacent_right", _as_adjacency(self.adjacent_right))
        n = len(self.left_bound.points)
        if len(self.right_bound.points) != n:
            raise ScenarioValidationError(
                f"lanelet {self.id}: left bound has {n} vertices, right "
                f"bound has {len(self.right_bound.points)}"
            )
        if self.center is None:
            mid = 0.5 * (self.left_bound.points + self.right_bound.points)
            object.__setattr__(self, "center", Polyline(mid))
        elif len(self.center.points) != n:
            raise ScenarioValidationError(
                f"lanelet {self.id}: center has {len(self.center.points)} "
                f"vertices, bounds have {n}"
            )

    @property
    def vertex_count(self) -> int:
        return len(self.center.points)

    @property
    def length(self) -> float:
        """Arclength of the centerline."""
        return self.center.length

    @property
    def orientation(self) -> float:
        """Direction of the first centerline segment."""
        return self.center.segment_orientation(0)

    def polygon(self) -> np.ndarray:
        """Closed boundary ring: left bound, then right bound reversed."""
        return np.vstack([self.left_bound.points, self.right_bound.points[::-1]])

    def adjacency_refs(self) -> tuple:
        return self.adjacent_left + self.adjacent_right


@dataclass(frozen=True)
class Scenario:
    """One recorded scene: a road network plus vehicle trajectories."""

    id: str
    dt: float
    lanelets: Mapping[int, Lanelet]
    obstacles: Mapping[int, DynamicObstacle]

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "dt", float(self.dt))
        if self.dt <= 0.0:
            raise ScenarioValidationError(f"dt must be positive, got {self.dt}")
        lanelets = MappingProxyType(dict(sorted(
            (int(k), v) for k, v in dict(self.lanelets).items()
        )))
        obstacles = MappingProxyType(dict(sorted(
            (int(k), v) for k, v in dict(self.obstacles).items()
        )))
        object.__setattr__(self, "lanelets", lanelets)
        object.__setattr__(self, "obstacles", obstacles)
        for lid, lanelet in lanelets.items():
            if lanelet.id != lid:
                raise ScenarioValidationError(
                    f"lanelet key {lid} does not match lanelet id {lanelet.id}"
                )
            refs = set(lanelet.predecessors) | set(lanelet.successors)
            refs.update(r.lanelet_id for r in lanelet.adjacency_refs())
            for ref in refs:
                if ref not in lanelets:
                    raise ScenarioValidationError(
                        f"lanelet {lid} references unknown lanelet {ref}"
                    )
        for oid, obstacle in obstacles.items():
            if obstacle.id != oid:
                raise ScenarioValidationError(
                    f"obstacle key {oid} does not match obstacle id {obstacle.id}"
                )

    def vehicles_at(self, timestep: int) -> dict:
        """Obstacle id -> state for every vehicle present at `timestep`."""
        out = {}
        for oid, obstacle in self.obstacles.items():
            state = obstacle.state_at(timestep)
            if state is not None:
                out[oid] = state
        return out

    @property
    def final_timestep(self) -> int:
        """Largest timestep at which any obstacle is present (0 if none)."""
        if not self.obstacles:
            return 0
        return max(o.last_timestep for o in self.obstacles.values())


def derive_state_derivatives(obstacle: DynamicObstacle, dt: float) -> DynamicObstacle:
    """Fill missing acceleration/yaw-rate by finite differences.

    Central differences in the interior, one-sided at the trajectory
    ends; orientation steps are wrapped into (-pi, pi] before dividing.
    States that already carry a value keep it.  A single-state
    trajectory gets zeros.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    states = obstacle.trajectory
    n = len(states)
    velocity = np.array([s.velocity for s in states])
    orientation = np.array([s.orientation for s in states])
    if n == 1:
        accel = np.zeros((1, 2))
        yaw = np.zeros(1)
    else:
        accel = np.empty((n, 2))
        accel[0] = (velocity[1] - velocity[0]) / dt
        accel[-1] = (velocity[-1] - velocity[-2]) / dt
        if n > 2:
            accel[1:-1] = (velocity[2:] - velocity[:-2]) / (2.0 * dt)
        yaw = np.empty(n)
        yaw[0] = wrap_angle(orientation[1] - orientation[0]) / dt
        yaw[-1] = wrap_angle(orientation[-1] - orientation[-2]) / dt
        if n > 2:
            yaw[1:-1] = wrap_angle(orientation[2:] - orientation[:-2]) / (2.0 * dt)
    filled = tuple(
        VehicleState(
            timestep=s.timestep,
            position=s.position,
            orientation=s.orientation,
            velocity=s.velocity,
            acceleration=s.acceleration if s.acceleration is not None else accel[i],
            yaw_rate=s.yaw_rate if s.yaw_rate is not None else float(yaw[i]),
        )
        for i, s in enumerate(states)
    )
    return DynamicObstacle(
        id=obstacle.id, length=obstacle.length, width=obstacle.width, trajectory=filled
    )
