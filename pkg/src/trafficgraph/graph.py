"""Heterogeneous traffic-graph data model.

A graph holds one node store per node type ("v" vehicles, "l" lanelets)
and one edge store per relation.  Feature matrices are float32 with a
named-channel column layout; ids and endpoint indices are int64.  All
arrays are frozen read-only at construction, so finalized graphs can be
shared freely across threads and processes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import GraphInvariantError, MergeError, SchemaError

__all__ = [
    "EDGE_ENDPOINT_TYPES",
    "EdgeStore",
    "FeatureChannel",
    "NodeStore",
    "TemporalTrafficGraph",
    "TrafficGraph",
    "merge_window",
    "new_graph",
    "validate_graph",
]

NODE_TYPES = ("v", "l")
#: relation -> (source node type, target node type)
EDGE_ENDPOINT_TYPES = {
    "l2l": ("l", "l"),
    "v2v": ("v", "v"),
    "v2l": ("v", "l"),
    "l2v": ("l", "v"),
    "vtv": ("v", "v"),
}


@dataclass(frozen=True)
class FeatureChannel:
    """One named group of feature columns in a store."""

    store: str
    name: str
    width: int
    unit: str = ""

    def __post_init__(self):
        if self.width < 1:
            raise SchemaError(
                f"channel {self.store}.{self.name}: width must be >= 1"
            )


def check_channels(store: str, channels: Sequence[FeatureChannel]) -> tuple:
    channels = tuple(channels)
    seen = set()
    for ch in channels:
        if ch.store != store:
            raise SchemaError(
                f"channel {ch.name} declared for store {ch.store!r}, "
                f"attached to {store!r}"
            )
        if ch.name in seen:
            raise SchemaError(f"duplicate channel {ch.name!r} in store {store!r}")
        seen.add(ch.name)
    return channels


def channels_width(channels: Sequence[FeatureChannel]) -> int:
    return sum(ch.width for ch in channels)


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(arr), dtype=dtype)
    out.setflags(write=False)
    return out


class NodeStore:
    """Nodes of one type: external ids plus a dense feature matrix.

    `ids` is (n,) for static stores and (n, 2) — (external id, timestep)
    — for temporal vehicle stores.  `metadata` carries named integer
    side-tensors that are not feature columns (e.g. the valid vertex
    count accompanying padded lanelet geometry).
    """

    __slots__ = ("node_type", "ids", "x", "channels", "metadata", "_index")

    def __init__(self, node_type, ids, x, channels, metadata=None):
        if node_type not in NODE_TYPES:
            raise SchemaError(f"unknown node type {node_type!r}")
        self.node_type = node_type
        self.ids = _frozen(ids, np.int64)
        self.x = _frozen(x, np.float32)
        self.channels = check_channels(node_type, channels)
        self.metadata = {
            str(k): _frozen(v, np.int64) for k, v in (metadata or {}).items()
        }
        if self.ids.ndim not in (1, 2) or (
            self.ids.ndim == 2 and self.ids.shape[1] != 2
        ):
            raise GraphInvariantError(
                f"{node_type}: ids must be (n,) or (n, 2), got {self.ids.shape}"
            )
        width = channels_width(self.channels)
        if self.x.ndim != 2 or self.x.shape != (len(self.ids), width):
            raise GraphInvariantError(
                f"{node_type}: feature matrix {self.x.shape} does not match "
                f"{len(self.ids)} nodes x {width} channel columns"
            )
        for name, arr in self.metadata.items():
            if len(arr) != len(self.ids):
                raise GraphInvariantError(
                    f"{node_type}: metadata {name!r} has {len(arr)} rows "
                    f"for {len(self.ids)} nodes"
                )
        self._index = None

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def is_temporal(self) -> bool:
        return self.ids.ndim == 2

    def key_of(self, row: int):
        """Hashable identity of one node (id, or (id, timestep))."""
        return tuple(self.ids[row]) if self.is_temporal else int(self.ids[row])

    def index_of(self, key) -> int:
        if self._index is None:
            self._index = {self.key_of(i): i for i in range(len(self))}
        return self._index[key]

    def channel_slice(self, name: str) -> slice:
        """Column slice of one named channel group."""
        offset = 0
        for ch in self.channels:
            if ch.name == name:
                return slice(offset, offset + ch.width)
            offset += ch.width
        raise KeyError(f"no channel {name!r} in store {self.node_type!r}")

    def __eq__(self, other):
        if not isinstance(other, NodeStore):
            return NotImplemented
        return (
            self.node_type == other.node_type
            and self.channels == other.channels
            and self.ids.shape == other.ids.shape
            and self.ids.tobytes() == other.ids.tobytes()
            and self.x.shape == other.x.shape
            and self.x.tobytes() == other.x.tobytes()
            and sorted(self.metadata) == sorted(other.metadata)
            and all(
                self.metadata[k].tobytes() == other.metadata[k].tobytes()
                for k in self.metadata
            )
        )


class EdgeStore:
    """Directed edges of one relation with a dense feature matrix."""

    __slots__ = ("relation", "edge_index", "x", "channels")

    def __init__(self, relation, edge_index, x, channels):
        if relation not in EDGE_ENDPOINT_TYPES:
            raise SchemaError(f"unknown edge relation {relation!r}")
        self.relation = relation
        self.edge_index = _frozen(
            np.asarray(edge_index).reshape(2, -1), np.int64
        )
        self.x = _frozen(x, np.float32)
        self.channels = check_channels(relation, channels)
        width = channels_width(self.channels)
        m = self.edge_index.shape[1]
        if self.x.shape != (m, width):
            raise GraphInvariantError(
                f"{relation}: feature matrix {self.x.shape} does not match "
                f"{m} edges x {width} channel columns"
            )

    def __len__(self) -> int:
        return self.edge_index.shape[1]

    def channel_slice(self, name: str) -> slice:
        offset = 0
        for ch in self.channels:
            if ch.name == name:
                return slice(offset, offset + ch.width)
            offset += ch.width
        raise KeyError(f"no channel {name!r} in relation {self.relation!r}")

    def __eq__(self, other):
        if not isinstance(other, EdgeStore):
            return NotImplemented
        return (
            self.relation == other.relation
            and self.channels == other.channels
            and self.edge_index.shape == other.edge_index.shape
            and self.edge_index.tobytes() == other.edge_index.tobytes()
            and self.x.shape == other.x.shape
            and self.x.tobytes() == other.x.tobytes()
        )


class TrafficGraph:
    """Snapshot of one scenario timestep as a heterogeneous graph."""

    __slots__ = ("scenario_id", "timestep", "dt", "nodes", "edges", "globals")

    def __init__(self, scenario_id, timestep, dt, nodes, edges, globals_=None):
        self.scenario_id = str(scenario_id)
        self.timestep = int(timestep)
        self.dt = float(dt)
        self.nodes = dict(nodes)
        self.edges = dict(edges)
        self.globals = {
            str(k): _frozen(v, np.float32) for k, v in (globals_ or {}).items()
        }
        for node_type, store in self.nodes.items():
            if store.node_type != node_type:
                raise GraphInvariantError(
                    f"node store keyed {node_type!r} holds type {store.node_type!r}"
                )
        for relation, store in self.edges.items():
            if store.relation != relation:
                raise GraphInvariantError(
                    f"edge store keyed {relation!r} holds relation {store.relation!r}"
                )
            src_t, dst_t = EDGE_ENDPOINT_TYPES[relation]
            if src_t not in self.nodes or dst_t not in self.nodes:
                raise GraphInvariantError(
                    f"relation {relation!r} references missing node store"
                )

    @property
    def window(self) -> Optional[tuple]:
        return None

    def replace_edges(self, **stores) -> "TrafficGraph":
        """New graph with some edge stores swapped out."""
        edges = dict(self.edges)
        edges.update(stores)
        return type(self)(**self._ctor_args(edges=edges))

    def replace_globals(self, globals_) -> "TrafficGraph":
        return type(self)(**self._ctor_args(globals_=dict(globals_)))

    def _ctor_args(self, **overrides):
        args = dict(
            scenario_id=self.scenario_id,
            timestep=self.timestep,
            dt=self.dt,
            nodes=self.nodes,
            edges=self.edges,
            globals_=self.globals,
        )
        args.update(overrides)
        return args

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return (
            self.scenario_id == other.scenario_id
            and self.timestep == other.timestep
            and self.dt == other.dt
            and self.window == other.window
            and self.nodes == other.nodes
            and self.edges == other.edges
            and sorted(self.globals) == sorted(other.globals)
            and all(
                self.globals[k].tobytes() == other.globals[k].tobytes()
                and self.globals[k].shape == other.globals[k].shape
                for k in self.globals
            )
        )

    def __repr__(self):
        nodes = {k: len(v) for k, v in sorted(self.nodes.items())}
        edges = {k: len(v) for k, v in sorted(self.edges.items())}
        return (
            f"{type(self).__name__}({self.scenario_id!r}, t={self.timestep}, "
            f"nodes={nodes}, edges={edges})"
        )


class TemporalTrafficGraph(TrafficGraph):
    """Traffic graph over a bounded window of timesteps.

    Vehicle nodes are repeated per timestep with (id, timestep) identity;
    the VTV store links realizations of the same vehicle forward in time.
    """

    __slots__ = ("_window",)

    def __init__(self, scenario_id, timestep, dt, nodes, edges, globals_=None,
                 window=None):
        super().__init__(scenario_id, timestep, dt, nodes, edges, globals_)
        if window is None:
            raise GraphInvariantError("temporal graph requires a window")
        lo, hi = int(window[0]), int(window[1])
        if lo > hi or hi != self.timestep:
            raise GraphInvariantError(
                f"window {(lo, hi)} inconsistent with timestep {self.timestep}"
            )
        self._window = (lo, hi)

    @property
    def window(self) -> tuple:
        return self._window

    def _ctor_args(self, **overrides):
        args = super()._ctor_args()
        args["window"] = self._window
        args.update(overrides)
        return args


def new_graph(scenario_id, timestep, channel_schema, dt=0.0) -> TrafficGraph:
    """Empty graph with the declared channels on every store.

    `channel_schema` maps store name ("v", "l", relations) to its channel
    sequence; duplicate channel names raise a schema error.
    """
    nodes = {}
    edges = {}
    for store, channels in channel_schema.items():
        channels = check_channels(store, channels)
        width = channels_width(channels)
        if store in NODE_TYPES:
            nodes[store] = NodeStore(
                store, np.empty(0, np.int64), np.empty((0, width), np.float32),
                channels,
            )
        elif store in EDGE_ENDPOINT_TYPES:
            edges[store] = EdgeStore(
                store, np.empty((2, 0), np.int64),
                np.empty((0, width), np.float32), channels,
            )
        else:
            raise SchemaError(f"unknown store {store!r} in channel schema")
    return TrafficGraph(scenario_id, timestep, dt, nodes, edges)


def validate_graph(graph: TrafficGraph) -> None:
    """Full invariant scan; raises GraphInvariantError on any violation."""
    for node_type, store in graph.nodes.items():
        keys = [store.key_of(i) for i in range(len(store))]
        if len(set(keys)) != len(keys):
            raise GraphInvariantError(
                f"{node_type}: node identities are not unique"
            )
        if store.is_temporal and node_type != "v":
            raise GraphInvariantError(
                f"{node_type}: only vehicle nodes may carry timestep tags"
            )
    for relation, store in graph.edges.items():
        src_t, dst_t = EDGE_ENDPOINT_TYPES[relation]
        n_src = len(graph.nodes[src_t])
        n_dst = len(graph.nodes[dst_t])
        if len(store):
            src, dst = store.edge_index
            if src.min(initial=0) < 0 or src.max(initial=-1) >= n_src:
                raise GraphInvariantError(
                    f"{relation}: source index out of range [0, {n_src})"
                )
            if dst.min(initial=0) < 0 or dst.max(initial=-1) >= n_dst:
                raise GraphInvariantError(
                    f"{relation}: target index out of range [0, {n_dst})"
                )
        if relation == "vtv" and len(store):
            vstore = graph.nodes["v"]
            if not vstore.is_temporal:
                raise GraphInvariantError("vtv edges on a non-temporal store")
            src, dst = store.edge_index
            src_ids = vstore.ids[src]
            dst_ids = vstore.ids[dst]
            if not np.array_equal(src_ids[:, 0], dst_ids[:, 0]):
                raise GraphInvariantError("vtv edge joins different vehicles")
            if not (dst_ids[:, 1] > src_ids[:, 1]).all():
                raise GraphInvariantError("vtv edge not forward in time")
    if isinstance(graph, TemporalTrafficGraph):
        lo, hi = graph.window
        vstore = graph.nodes.get("v")
        if vstore is not None and len(vstore) and vstore.is_temporal:
            steps = vstore.ids[:, 1]
            if steps.min() < lo or steps.max() > hi:
                raise GraphInvariantError(
                    f"vehicle timesteps outside window {graph.window}"
                )


def merge_window(graphs: Sequence[TrafficGraph],
                 vtv_channels: Sequence[FeatureChannel] = ()) -> TemporalTrafficGraph:
    """Merge per-timestep graphs into one temporal graph.

    Vehicle nodes from every input appear with (id, timestep) identity,
    ordered by ascending id, then timestep.  Lanelet nodes and L2L edges
    come from the newest graph only; per-timestep V2V/V2L/L2V edges are
    re-indexed into the merged stores.  The VTV store starts empty — a
    temporal edge drawer fills it.
    """
    graphs = list(graphs)
    if not graphs:
        raise MergeError("cannot merge an empty window")
    newest = graphs[-1]
    steps = [g.timestep for g in graphs]
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise MergeError(f"window timesteps not strictly increasing: {steps}")
    for g in graphs:
        if g.scenario_id != newest.scenario_id:
            raise MergeError(
                f"mixed scenarios in window: {g.scenario_id!r} vs "
                f"{newest.scenario_id!r}"
            )
        if g.dt != newest.dt:
            raise MergeError("mixed dt in window")
        for store_key in ("v", "l"):
            if g.nodes[store_key].channels != newest.nodes[store_key].channels:
                raise MergeError(f"channel schema mismatch in store {store_key!r}")
        for relation in g.edges:
            if relation not in newest.edges or (
                g.edges[relation].channels != newest.edges[relation].channels
            ):
                raise MergeError(f"channel schema mismatch in relation {relation!r}")
        if not np.array_equal(g.nodes["l"].ids, newest.nodes["l"].ids):
            raise MergeError("lanelet node sets differ across the window")

    # Merged temporal vehicle store, sorted by (id, timestep).
    keyed_rows = []  # ((id, timestep), graph position, row)
    for pos, g in enumerate(graphs):
        vstore = g.nodes["v"]
        if vstore.is_temporal:
            raise MergeError("window inputs must be single-timestep graphs")
        for row in range(len(vstore)):
            keyed_rows.append(((int(vstore.ids[row]), g.timestep), pos, row))
    keyed_rows.sort(key=lambda item: item[0])
    merged_ids = np.array([key for key, _, _ in keyed_rows], np.int64).reshape(-1, 2)
    v_width = channels_width(newest.nodes["v"].channels)
    merged_x = np.empty((len(keyed_rows), v_width), np.float32)
    for out_row, (_, pos, row) in enumerate(keyed_rows):
        merged_x[out_row] = graphs[pos].nodes["v"].x[row]
    v_store = NodeStore("v", merged_ids, merged_x, newest.nodes["v"].channels)
    new_index = {key: i for i, (key, _, _) in enumerate(keyed_rows)}

    nodes = {"v": v_store, "l": newest.nodes["l"]}
    edges = {}
    if "l2l" in newest.edges:
        edges["l2l"] = newest.edges["l2l"]
    for relation in ("v2v", "v2l", "l2v"):
        if relation not in newest.edges:
            continue
        src_t, dst_t = EDGE_ENDPOINT_TYPES[relation]
        index_parts = []
        x_parts = []
        for g in graphs:
            store = g.edges[relation]
            if not len(store):
                continue
            src, dst = store.edge_index
            if src_t == "v":
                g_v = g.nodes["v"]
                src = np.array(
                    [new_index[(int(g_v.ids[i]), g.timestep)] for i in src],
                    np.int64,
                )
            if dst_t == "v":
                g_v = g.nodes["v"]
                dst = np.array(
                    [new_index[(int(g_v.ids[i]), g.timestep)] for i in dst],
                    np.int64,
                )
            index_parts.append(np.stack([src, dst]))
            x_parts.append(store.x)
        if index_parts:
            edge_index = np.concatenate(index_parts, axis=1)
            x = np.concatenate(x_parts, axis=0)
        else:
            edge_index = np.empty((2, 0), np.int64)
            x = np.empty((0, channels_width(newest.edges[relation].channels)),
                         np.float32)
        edges[relation] = EdgeStore(
            relation, edge_index, x, newest.edges[relation].channels
        )
    vtv_channels = check_channels("vtv", vtv_channels)
    edges["vtv"] = EdgeStore(
        "vtv", np.empty((2, 0), np.int64),
        np.empty((0, channels_width(vtv_channels)), np.float32), vtv_channels,
    )
    return TemporalTrafficGraph(
        newest.scenario_id, newest.timestep, newest.dt, nodes, edges,
        globals_=newest.globals, window=(graphs[0].timestep, newest.timestep),
    )
