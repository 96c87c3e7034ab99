"""Memory-mapped reading of traffic-graph sample datasets.

A dataset directory holds a ``manifest.json`` plus one ``.crg`` file per
sample.  Each sample file is self-describing: ``CRG1`` magic, a u32
format version, a u64 header length, a JSON header, and 8-byte-aligned
little-endian array payloads.  This module maps the file into memory
and exposes every array as a read-only NumPy view over the mapping, so
no tensor payload is ever copied.
"""
from __future__ import annotations

import json
import mmap
import zlib
from pathlib import Path

import numpy as np

__all__ = [
    "LoaderError",
    "ReadError",
    "UnsupportedVersionError",
    "LoadedSample",
    "DatasetReader",
    "load_dataset",
    "to_hetero_dict",
    "MAGIC",
    "SUPPORTED_FORMAT_VERSION",
    "SUPPORTED_MANIFEST_VERSION",
]

MAGIC = b"CRG1"
SUPPORTED_FORMAT_VERSION = 1
SUPPORTED_MANIFEST_VERSION = 1

NODE_TYPES = ("v", "l")
RELATION_ENDPOINTS = {
    "v2v": ("v", "v2v", "v"),
    "l2l": ("l", "l2l", "l"),
    "v2l": ("v", "v2l", "l"),
    "l2v": ("l", "l2v", "v"),
    "vtv": ("v", "vtv", "v"),
}

_DTYPES = {"f32": np.dtype("<f4"), "i64": np.dtype("<i8")}


class LoaderError(Exception):
    """Base class for everything this reader can raise."""


class ReadError(LoaderError):
    """A file is missing, corrupt, or fails its checksum."""


class UnsupportedVersionError(LoaderError):
    """The file or manifest was written by an incompatible version."""


class LoadedSample:
    """One sample: header metadata plus zero-copy array views.

    ``stores`` maps every store key (including ``"globals"``) to its
    ``{array name: ndarray}`` dictionary; ``nodes``/``edges``/``globals``
    are filtered views of it.  ``raw`` is the whole file as a uint8
    array over the same mapping, handy for byte-level comparisons.
    """

    __slots__ = ("scenario_id", "timestep", "dt", "window", "channels",
                 "stores", "raw")

    def __init__(self, scenario_id, timestep, dt, window, channels,
                 stores, raw):
        self.scenario_id = scenario_id
        self.timestep = timestep
        self.dt = dt
        self.window = window
        self.channels = channels
        self.stores = stores
        self.raw = raw

    @property
    def nodes(self) -> dict:
        return {k: v for k, v in self.stores.items() if k in NODE_TYPES}

    @property
    def edges(self) -> dict:
        return {k: v for k, v in self.stores.items()
                if k in RELATION_ENDPOINTS}

    @property
    def globals(self) -> dict:
        return self.stores.get("globals", {})

    def __repr__(self):
        return (f"LoadedSample({self.scenario_id!r}, t={self.timestep}, "
                f"stores={sorted(self.stores)})")


def _read_u32(buf, offset: int) -> int:
    return int.from_bytes(buf[offset:offset + 4], "little")


def _read_u64(buf, offset: int) -> int:
    return int.from_bytes(buf[offset:offset + 8], "little")


def _array_view(buf, desc: dict, size: int) -> np.ndarray:
    try:
        dtype = _DTYPES[desc["dtype"]]
        shape = tuple(int(s) for s in desc["shape"])
        offset = int(desc["offset"])
        length = int(desc["length"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ReadError(f"bad array descriptor: {desc}") from exc
    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    if length != count * dtype.itemsize:
        raise ReadError(
            f"{desc['store']}/{desc['name']}: {length} bytes cannot hold "
            f"shape {shape}"
        )
    if offset % 8 or offset < 0 or offset + length > size:
        raise ReadError(
            f"{desc['store']}/{desc['name']}: payload [{offset}, "
            f"{offset + length}) outside the {size}-byte file"
        )
    view = np.frombuffer(buf, dtype=dtype, count=count, offset=offset)
    return view.reshape(shape)


def parse_sample(buf) -> LoadedSample:
    """Decode one sample from any buffer (mmap, bytes, memoryview)."""
    size = len(buf)
    if size < 16:
        raise ReadError(f"sample of {size} bytes is too short for a header")
    if bytes(buf[0:4]) != MAGIC:
        raise ReadError(f"bad magic {bytes(buf[0:4])!r}")
    version = _read_u32(buf, 4)
    if version != SUPPORTED_FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"sample format version {version}, reader supports "
            f"{SUPPORTED_FORMAT_VERSION}"
        )
    header_len = _read_u64(buf, 8)
    if 16 + header_len > size:
        raise ReadError("header runs past the end of the file")
    try:
        header = json.loads(bytes(buf[16:16 + header_len]).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ReadError(f"unreadable sample header: {exc}") from exc

    channels = {store: tuple(dict(ch) for ch in chans)
                for store, chans in header.get("channels", {}).items()}
    stores: dict = {}
    for desc in header.get("arrays", ()):
        if not isinstance(desc, dict) or "store" not in desc:
            raise ReadError(f"bad array descriptor: {desc}")
        stores.setdefault(desc["store"], {})[desc.get("name")] = _array_view(
            buf, desc, size
        )

    # a store may be declared by the schema yet ship no arrays at all;
    # present it as empty rather than absent
    for store, chans in channels.items():
        if store in stores:
            continue
        width = sum(int(ch["width"]) for ch in chans)
        if store in NODE_TYPES:
            stores[store] = {"ids": np.empty(0, np.int64),
                             "x": np.empty((0, width), np.float32)}
        else:
            stores[store] = {"edge_index": np.empty((2, 0), np.int64),
                             "x": np.empty((0, width), np.float32)}

    for store, arrays in stores.items():
        if store == "globals":
            continue
        if store not in channels:
            raise ReadError(f"store {store!r} has arrays but no schema")
        if "x" in arrays:
            width = sum(int(ch["width"]) for ch in channels[store])
            if arrays["x"].ndim != 2 or arrays["x"].shape[1] != width:
                raise ReadError(
                    f"store {store!r}: feature matrix {arrays['x'].shape} "
                    f"does not match schema width {width}"
                )

    try:
        scenario_id = header["scenario_id"]
        timestep = header["timestep"]
    except KeyError as exc:
        raise ReadError(f"sample header missing {exc}") from exc
    window = header.get("window")
    return LoadedSample(
        scenario_id=scenario_id,
        timestep=timestep,
        dt=header.get("dt", 0.0),
        window=None if window is None else tuple(window),
        channels=channels,
        stores=stores,
        raw=np.frombuffer(buf, dtype=np.uint8),
    )


class DatasetReader:
    """Random access over a dataset directory, one mmap per sample."""

    def __init__(self, directory):
        self.directory = Path(directory)
        manifest_path = self.directory / "manifest.json"
        if not manifest_path.is_file():
            raise ReadError(f"no manifest.json under {self.directory}")
        try:
            self.manifest = json.loads(manifest_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ReadError(f"corrupt manifest: {exc}") from exc
        version = self.manifest.get("format_version")
        if version != SUPPORTED_MANIFEST_VERSION:
            raise UnsupportedVersionError(
                f"manifest version {version!r}, reader supports "
                f"{SUPPORTED_MANIFEST_VERSION}"
            )
        self.index = list(self.manifest.get("index", []))

    def __len__(self) -> int:
        return len(self.index)

    @property
    def schema(self) -> dict:
        return self.manifest.get("schema", {})

    def entry(self, i: int) -> dict:
        if not 0 <= i < len(self.index):
            raise IndexError(f"sample {i} out of range [0, {len(self)})")
        return self.index[i]

    def __getitem__(self, i: int) -> LoadedSample:
        entry = self.entry(i)
        path = self.directory / entry["file"]
        try:
            with open(path, "rb") as fh:
                buf = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
        except (OSError, ValueError) as exc:
            raise ReadError(f"cannot map {entry['file']}: {exc}") from exc
        if len(buf) != entry["bytes"]:
            raise ReadError(
                f"{entry['file']}: manifest promises {entry['bytes']} "
                f"bytes, file has {len(buf)}"
            )
        if zlib.crc32(buf) & 0xFFFFFFFF != entry["crc32"]:
            raise ReadError(f"{entry['file']}: checksum mismatch")
        return parse_sample(buf)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def load_dataset(path) -> DatasetReader:
    """Open a dataset directory for reading."""
    return DatasetReader(path)


def to_hetero_dict(sample: LoadedSample) -> dict:
    """Arrays keyed by node type and (source, relation, target) triple.

    Node entries keep every array of the store (ids, features, any
    metadata); relation entries carry ``edge_index`` and ``x``.  The
    key set mirrors exactly the stores of the sample's schema, so empty
    stores stay visible.
    """
    out: dict = {}
    for store, arrays in sample.stores.items():
        if store == "globals":
            continue
        if store in NODE_TYPES:
            out[store] = dict(arrays)
        elif store in RELATION_ENDPOINTS:
            out[RELATION_ENDPOINTS[store]] = dict(arrays)
        else:
            raise LoaderError(f"unknown store key {store!r}")
    return out
