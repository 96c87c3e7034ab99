"""Standard feature catalog: per-store channel schemas and row builders.

All rows are computed in float64 and cast to float32 once per matrix.
Relative quantities are expressed in the frame of the edge's source
entity, so they are invariant under rigid motions of the whole scene.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import ExtractionError, SchemaError
from .geometry import LocalFrame, Polyline, angle_diff
from .graph import FeatureChannel, channels_width, check_channels
from .scenario import DynamicObstacle, Lanelet, VehicleState

__all__ = [
    "DEFAULT_N_PAD",
    "PAD_VALUE",
    "FeatureContext",
    "CustomFeatureExtractor",
    "base_schema",
    "vehicle_channels",
    "lanelet_channels",
    "l2l_channels",
    "v2v_channels",
    "vtv_channels",
    "v2l_channels",
    "l2v_channels",
    "vehicle_rows",
    "lanelet_rows",
    "l2l_rows",
    "v2v_rows",
    "vtv_rows",
    "v2l_rows",
    "register_custom_extractor",
    "run_custom_extractor",
]

DEFAULT_N_PAD = 20
#: sentinel filling unused vertex slots in padded lanelet geometry
PAD_VALUE = float("nan")


def vehicle_channels() -> tuple:
    return (
        FeatureChannel("v", "position", 2, "m"),
        FeatureChannel("v", "orientation", 1, "rad"),
        FeatureChannel("v", "yaw_rate", 1, "rad/s"),
        FeatureChannel("v", "velocity", 2, "m/s"),
        FeatureChannel("v", "acceleration", 2, "m/s^2"),
        FeatureChannel("v", "width", 1, "m"),
        FeatureChannel("v", "length", 1, "m"),
    )


def lanelet_channels(n_pad: int = DEFAULT_N_PAD) -> tuple:
    return (
        FeatureChannel("l", "position", 2, "m"),
        FeatureChannel("l", "length", 1, "m"),
        FeatureChannel("l", "orientation", 1, "rad"),
        FeatureChannel("l", "left_vertices", 2 * n_pad, "m"),
        FeatureChannel("l", "right_vertices", 2 * n_pad, "m"),
    )


def l2l_channels() -> tuple:
    return (
        FeatureChannel("l2l", "distance", 1, "m"),
        FeatureChannel("l2l", "relative_position", 2, "m"),
        FeatureChannel("l2l", "relative_orientation", 1, "rad"),
        FeatureChannel("l2l", "source_arclength", 1, "m"),
        FeatureChannel("l2l", "target_arclength", 1, "m"),
        FeatureChannel("l2l", "adjacency_type", 1, ""),
    )


def v2v_channels() -> tuple:
    return (
        FeatureChannel("v2v", "distance", 1, "m"),
        FeatureChannel("v2v", "relative_position", 2, "m"),
        FeatureChannel("v2v", "relative_orientation", 1, "rad"),
        FeatureChannel("v2v", "relative_velocity", 2, "m/s"),
        FeatureChannel("v2v", "relative_acceleration", 2, "m/s^2"),
    )


def vtv_channels() -> tuple:
    return tuple(
        FeatureChannel("vtv", ch.name, ch.width, ch.unit) for ch in v2v_channels()
    ) + (FeatureChannel("vtv", "time_delta", 1, "s"),)


def v2l_channels() -> tuple:
    return (
        FeatureChannel("v2l", "distance_left", 1, "m"),
        FeatureChannel("v2l", "distance_right", 1, "m"),
        FeatureChannel("v2l", "lateral_offset", 1, "m"),
        FeatureChannel("v2l", "heading_error", 1, "rad"),
        FeatureChannel("v2l", "arclength", 1, "m"),
        FeatureChannel("v2l", "arclength_normalized", 1, ""),
    )


def l2v_channels() -> tuple:
    return tuple(
        FeatureChannel("l2v", ch.name, ch.width, ch.unit) for ch in v2l_channels()
    )


def base_schema(n_pad: int = DEFAULT_N_PAD) -> dict:
    """Full channel schema for every store, keyed by store name."""
    return {
        "v": vehicle_channels(),
        "l": lanelet_channels(n_pad),
        "l2l": l2l_channels(),
        "v2v": v2v_channels(),
        "v2l": v2l_channels(),
        "l2v": l2v_channels(),
        "vtv": vtv_channels(),
    }


# ---------------------------------------------------------------------------
# node rows


def _vehicle_row(obstacle: DynamicObstacle, state: VehicleState) -> list:
    yaw_rate = 0.0 if state.yaw_rate is None else float(state.yaw_rate)
    acc = (0.0, 0.0) if state.acceleration is None else state.acceleration
    return [
        state.position[0], state.position[1],
        state.orientation,
        yaw_rate,
        state.velocity[0], state.velocity[1],
        acc[0], acc[1],
        obstacle.width,
        obstacle.length,
    ]


def vehicle_rows(pairs: Sequence[tuple]) -> np.ndarray:
    """(n, 10) matrix for (obstacle, state) pairs."""
    rows = [_vehicle_row(obstacle, state) for obstacle, state in pairs]
    return np.asarray(rows, np.float64).reshape(len(rows), 10).astype(np.float32)


def _padded_vertices(bound: Polyline, frame: LocalFrame, n_pad: int) -> np.ndarray:
    pts = bound.points
    if len(pts) > n_pad:
        arcs = np.linspace(0.0, bound.length, n_pad)
        pts = np.array([bound.point_at(s)[0] for s in arcs])
    local = frame.to_local(pts)
    out = np.full(2 * n_pad, PAD_VALUE)
    out[: 2 * len(pts)] = local.ravel()
    return out


def lanelet_rows(lanelets: Sequence[Lanelet],
                 n_pad: int = DEFAULT_N_PAD) -> tuple:
    """Lanelet feature matrix plus the per-node valid-vertex counts.

    Bound vertices are expressed in the lanelet's own frame (origin at
    the first centerline vertex, x-axis along the first segment) and
    padded with NaN up to `n_pad` points per side.  Lanelets with more
    vertices than fit are resampled to exactly `n_pad` points at uniform
    arclength spacing along each bound.
    """
    if n_pad < 2:
        raise SchemaError(f"n_pad must be >= 2, got {n_pad}")
    width = 4 + 4 * n_pad
    x = np.empty((len(lanelets), width), np.float64)
    counts = np.empty(len(lanelets), np.int64)
    for i, lanelet in enumerate(lanelets):
        origin = lanelet.center.points[0]
        frame = LocalFrame(origin, lanelet.orientation)
        x[i, 0:2] = origin
        x[i, 2] = lanelet.length
        x[i, 3] = lanelet.orientation
        x[i, 4:4 + 2 * n_pad] = _padded_vertices(lanelet.left_bound, frame, n_pad)
        x[i, 4 + 2 * n_pad:] = _padded_vertices(lanelet.right_bound, frame, n_pad)
        counts[i] = min(lanelet.vertex_count, n_pad)
    return x.astype(np.float32), counts


# ---------------------------------------------------------------------------
# edge rows


def l2l_rows(edges: Sequence[tuple], lanelets_by_id: Mapping) -> np.ndarray:
    """(m, 7) matrix for (src_id, dst_id, code, s_src, s_dst) records."""
    x = np.empty((len(edges), 7), np.float64)
    for i, (src_id, dst_id, code, s_src, s_dst) in enumerate(edges):
        src = lanelets_by_id[src_id]
        dst = lanelets_by_id[dst_id]
        frame = LocalFrame(src.center.points[0], src.orientation)
        rel = frame.to_local(dst.center.points[0])
        x[i, 0] = np.hypot(*rel)
        x[i, 1:3] = rel
        x[i, 3] = angle_diff(dst.orientation, src.orientation)
        x[i, 4] = s_src
        x[i, 5] = s_dst
        x[i, 6] = code
    return x.astype(np.float32)


def _relative_motion_row(src: VehicleState, dst: VehicleState) -> list:
    frame = LocalFrame(src.position, src.orientation)
    rel_pos = frame.to_local(dst.position)
    dv = np.asarray(dst.velocity, np.float64) - np.asarray(src.velocity, np.float64)
    src_acc = (0.0, 0.0) if src.acceleration is None else src.acceleration
    dst_acc = (0.0, 0.0) if dst.acceleration is None else dst.acceleration
    da = np.asarray(dst_acc, np.float64) - np.asarray(src_acc, np.float64)
    rel_v = frame.to_local_vector(dv)
    rel_a = frame.to_local_vector(da)
    return [
        np.hypot(*rel_pos),
        rel_pos[0], rel_pos[1],
        angle_diff(dst.orientation, src.orientation),
        rel_v[0], rel_v[1],
        rel_a[0], rel_a[1],
    ]


def v2v_rows(pairs: Sequence[tuple]) -> np.ndarray:
    """(m, 8) matrix for (source state, target state) pairs."""
    rows = [_relative_motion_row(src, dst) for src, dst in pairs]
    return np.asarray(rows, np.float64).reshape(len(rows), 8).astype(np.float32)


def vtv_rows(pairs: Sequence[tuple], dt: float) -> np.ndarray:
    """(m, 9) matrix for (older state, newer state) pairs of one vehicle.

    The trailing column is the elapsed time between the two states; it
    is strictly positive because temporal edges point forward in time.
    """
    rows = []
    for src, dst in pairs:
        if dst.timestep <= src.timestep:
            raise ExtractionError(
                f"temporal edge not forward in time: {src.timestep} -> "
                f"{dst.timestep}"
            )
        rows.append(_relative_motion_row(src, dst)
                    + [(dst.timestep - src.timestep) * dt])
    return np.asarray(rows, np.float64).reshape(len(rows), 9).astype(np.float32)


def _v2l_row(state: VehicleState, lanelet: Lanelet) -> list:
    p = state.position
    d_left = lanelet.left_bound.project(p).distance
    d_right = lanelet.right_bound.project(p).distance
    proj = lanelet.center.project(p)
    return [
        d_left,
        d_right,
        (d_left - d_right) / 2.0,
        angle_diff(proj.tangent_orientation, state.orientation),
        proj.arclength,
        proj.arclength / lanelet.length,
    ]


def v2l_rows(pairs: Sequence[tuple]) -> np.ndarray:
    """(m, 6) matrix for (vehicle state, lanelet) pairs."""
    rows = [_v2l_row(state, lanelet) for state, lanelet in pairs]
    return np.asarray(rows, np.float64).reshape(len(rows), 6).astype(np.float32)


# ---------------------------------------------------------------------------
# custom extractors


@dataclass
class FeatureContext:
    """Everything a custom extractor may look at for one timestep."""

    scenario_id: str
    timestep: int
    dt: float
    vehicles: Sequence[tuple]          # (obstacle, state), store row order
    lanelets: Sequence[Lanelet]        # store row order
    edges: Mapping[str, Sequence]      # relation -> row-ordered endpoint records


@runtime_checkable
class CustomFeatureExtractor(Protocol):
    """User-supplied channel producer for one store.

    Implementations declare `name`, `store` and `channels`, and return a
    `(rows, total declared width)` float matrix when called with the
    timestep context; `rows` must equal the store's row count.
    """

    name: str
    store: str
    channels: Sequence[FeatureChannel]

    def __call__(self, context: FeatureContext) -> np.ndarray: ...


def register_custom_extractor(schema: Mapping,
                              extractor: CustomFeatureExtractor) -> dict:
    """Append the extractor's channels to the schema it extends.

    Returns a new schema mapping; collisions with existing channel names
    raise a schema error.
    """
    store = extractor.store
    if store not in schema:
        raise SchemaError(
            f"extractor {extractor.name!r} targets unknown store {store!r}"
        )
    existing = {ch.name for ch in schema[store]}
    extra = check_channels(store, extractor.channels)
    for ch in extra:
        if ch.name in existing:
            raise SchemaError(
                f"extractor {extractor.name!r} redeclares channel "
                f"{ch.name!r} of store {store!r}"
            )
    out = dict(schema)
    out[store] = tuple(schema[store]) + extra
    return out


def run_custom_extractor(extractor: CustomFeatureExtractor,
                         context: FeatureContext, n_rows: int) -> np.ndarray:
    """Invoke one custom extractor and validate its output shape."""
    width = channels_width(extractor.channels)
    out = np.asarray(extractor(context), np.float64)
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.shape != (n_rows, width):
        raise ExtractionError(
            f"extractor {extractor.name!r} produced shape {out.shape}, "
            f"declared {(n_rows, width)}"
        )
    return out.astype(np.float32)
