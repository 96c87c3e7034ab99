"""Self-describing binary sample format for traffic graphs.

Layout: magic ``CRG1`` | format version (u32 LE) | header length
(u64 LE) | UTF-8 JSON header | raw array payloads.  The header carries
the graph metadata, the channel schema, and one descriptor per array
(store, name, dtype, shape, absolute byte offset, byte length).  Every
payload starts on an 8-byte boundary with zero padding in between, so
readers can memory-map arrays in place.  Serialization is fully
deterministic: equal graphs produce identical bytes.
"""
from __future__ import annotations

import json
from typing import Union

import numpy as np

from .errors import SerializationError
from .graph import (
    EdgeStore,
    FeatureChannel,
    NodeStore,
    TemporalTrafficGraph,
    TrafficGraph,
)

__all__ = ["MAGIC", "FORMAT_VERSION", "serialize", "deserialize",
           "write_sample", "read_sample"]

MAGIC = b"CRG1"
FORMAT_VERSION = 1

_DTYPES = {"f32": np.dtype("<f4"), "i64": np.dtype("<i8")}


def _dtype_tag(arr: np.ndarray) -> str:
    if arr.dtype == np.float32:
        return "f32"
    if arr.dtype == np.int64:
        return "i64"
    raise SerializationError(f"unsupported array dtype {arr.dtype}")


def _align8(n: int) -> int:
    return (n + 7) & ~7


def _collect_arrays(graph: TrafficGraph) -> list:
    """Deterministic (store, name, array) order: nodes, edges, globals."""
    out = []
    for node_type in sorted(graph.nodes):
        store = graph.nodes[node_type]
        out.append((node_type, "ids", store.ids))
        out.append((node_type, "x", store.x))
        for name in sorted(store.metadata):
            out.append((node_type, name, store.metadata[name]))
    for relation in sorted(graph.edges):
        store = graph.edges[relation]
        out.append((relation, "edge_index", store.edge_index))
        out.append((relation, "x", store.x))
    for name in sorted(graph.globals):
        out.append(("globals", name, graph.globals[name]))
    return out


def serialize(graph: TrafficGraph) -> bytes:
    arrays = _collect_arrays(graph)
    raws = [np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"),
                                             copy=False).tobytes()
            for _, _, arr in arrays]
    channels = {
        store_key: [
            {"name": ch.name, "width": ch.width, "unit": ch.unit}
            for ch in store.channels
        ]
        for store_key, store in
        list(graph.nodes.items()) + list(graph.edges.items())
    }

    def build_header(offsets):
        descriptors = [
            {
                "store": store_key,
                "name": name,
                "dtype": _dtype_tag(arr),
                "shape": list(arr.shape),
                "offset": offset,
                "length": len(raw),
            }
            for (store_key, name, arr), raw, offset
            in zip(arrays, raws, offsets)
        ]
        header = {
            "scenario_id": graph.scenario_id,
            "timestep": graph.timestep,
            "window": list(graph.window) if graph.window else None,
            "dt": graph.dt,
            "channels": channels,
            "arrays": descriptors,
        }
        return json.dumps(header, sort_keys=True,
                          separators=(",", ":")).encode("utf-8")

    # Offsets are absolute, and they appear inside the header whose size
    # they depend on; iterate to the (rapidly reached) fixed point.
    header_len = 0
    for _ in range(64):
        cursor = _align8(16 + header_len)
        offsets = []
        for raw in raws:
            offsets.append(cursor)
            cursor = _align8(cursor + len(raw))
        blob = build_header(offsets)
        if len(blob) == header_len:
            break
        header_len = len(blob)
    else:  # pragma: no cover - offsets grow monotonically, must converge
        raise SerializationError("header layout failed to converge")

    total = offsets[-1] + len(raws[-1]) if raws else 16 + header_len
    buf = bytearray(total)
    buf[0:4] = MAGIC
    buf[4:8] = FORMAT_VERSION.to_bytes(4, "little")
    buf[8:16] = header_len.to_bytes(8, "little")
    buf[16:16 + header_len] = blob
    for raw, offset in zip(raws, offsets):
        buf[offset:offset + len(raw)] = raw
    return bytes(buf)


def _read_array(data: bytes, desc: dict) -> np.ndarray:
    try:
        dtype = _DTYPES[desc["dtype"]]
        shape = tuple(int(s) for s in desc["shape"])
        offset = int(desc["offset"])
        length = int(desc["length"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"malformed array descriptor: {desc}") from exc
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    if length != count * dtype.itemsize:
        raise SerializationError(
            f"array {desc['store']}/{desc['name']}: length {length} does not "
            f"match shape {shape}"
        )
    if offset % 8 or offset < 0 or offset + length > len(data):
        raise SerializationError(
            f"array {desc['store']}/{desc['name']}: payload "
            f"[{offset}, {offset + length}) outside file of {len(data)} bytes"
        )
    arr = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    return arr.reshape(shape)


def deserialize(data: bytes) -> Union[TrafficGraph, TemporalTrafficGraph]:
    if len(data) < 16:
        raise SerializationError(f"truncated sample: {len(data)} bytes")
    if data[0:4] != MAGIC:
        raise SerializationError(f"bad magic {data[0:4]!r}, expected {MAGIC!r}")
    version = int.from_bytes(data[4:8], "little")
    if version != FORMAT_VERSION:
        raise SerializationError(
            f"unsupported format version {version} (reader supports "
            f"{FORMAT_VERSION})"
        )
    header_len = int.from_bytes(data[8:16], "little")
    if 16 + header_len > len(data):
        raise SerializationError("header extends past end of file")
    try:
        header = json.loads(data[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SerializationError(f"unreadable sample header: {exc}") from exc

    channels = {
        store: tuple(
            FeatureChannel(store, ch["name"], int(ch["width"]),
                           ch.get("unit", ""))
            for ch in chans
        )
        for store, chans in header.get("channels", {}).items()
    }
    grouped: dict = {}
    for desc in header.get("arrays", ()):
        grouped.setdefault(desc["store"], {})[desc["name"]] = _read_array(
            data, desc
        )

    nodes = {}
    edges = {}
    globals_ = {}
    for store_key, parts in grouped.items():
        if store_key == "globals":
            globals_ = dict(parts)
            continue
        if store_key not in channels:
            raise SerializationError(
                f"store {store_key!r} has arrays but no channel schema"
            )
        try:
            if "edge_index" in parts:
                edges[store_key] = EdgeStore(
                    store_key, parts.pop("edge_index"), parts.pop("x"),
                    channels[store_key],
                )
                if parts:
                    raise SerializationError(
                        f"unexpected arrays in edge store {store_key!r}: "
                        f"{sorted(parts)}"
                    )
            else:
                nodes[store_key] = NodeStore(
                    store_key, parts.pop("ids"), parts.pop("x"),
                    channels[store_key], metadata=parts,
                )
        except KeyError as exc:
            raise SerializationError(
                f"store {store_key!r} is missing array {exc}"
            ) from exc
    # Stores declared in the schema but absent from the payload are empty.
    for store_key, chans in channels.items():
        if store_key in nodes or store_key in edges:
            continue
        width = sum(ch.width for ch in chans)
        if store_key in ("v", "l"):
            nodes[store_key] = NodeStore(
                store_key, np.empty(0, np.int64),
                np.empty((0, width), np.float32), chans,
            )
        else:
            edges[store_key] = EdgeStore(
                store_key, np.empty((2, 0), np.int64),
                np.empty((0, width), np.float32), chans,
            )

    try:
        scenario_id = header["scenario_id"]
        timestep = header["timestep"]
        dt = header.get("dt", 0.0)
        window = header.get("window")
    except KeyError as exc:
        raise SerializationError(f"sample header missing {exc}") from exc
    if window is None:
        return TrafficGraph(scenario_id, timestep, dt, nodes, edges, globals_)
    return TemporalTrafficGraph(scenario_id, timestep, dt, nodes, edges,
                                globals_, window=tuple(window))


def write_sample(path, graph: TrafficGraph) -> int:
    """Serialize to a file; returns the byte count written."""
    data = serialize(graph)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_sample(path) -> Union[TrafficGraph, TemporalTrafficGraph]:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
