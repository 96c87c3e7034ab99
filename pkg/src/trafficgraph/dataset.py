"""Persistent multi-scenario dataset creation and access.

A dataset directory holds one binary sample file per extracted graph
under ``samples/`` plus a ``manifest.json`` written last as the commit
point: its presence marks a complete dataset.  The manifest carries the
format version, a fingerprint of the creating configuration, the
channel schema, and a checksummed index of every sample.
"""
from __future__ import annotations

import concurrent.futures
import datetime
import hashlib
import json
import logging
import zlib
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .errors import ConfigError, DatasetError, TrafficGraphError
from .extractor import (
    ExtractionConfig,
    Simulation,
    TemporalTrafficExtractor,
    TrafficExtractor,
    build_schemas,
)
from .pipeline import TransformChain
from .scenario import Scenario
from .scenario_xml import parse_scenario
from .serialize import deserialize, serialize

__all__ = ["CollectorConfig", "Dataset", "collect_scenario", "create_dataset",
           "open_dataset", "config_fingerprint"]

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


@dataclass(frozen=True)
class CollectorConfig:
    """How many graphs to take from each scenario, and how.

    `timesteps` caps the number of samples per scenario (None = full
    lifetime); `stride` keeps every k-th timestep; `temporal` switches
    to windowed extraction, where `skip_warmup` drops the first
    cache_size − 1 steps whose windows are still filling up.
    """

    timesteps: Optional[int] = None
    stride: int = 1
    temporal: bool = False
    skip_warmup: bool = False

    def __post_init__(self):
        problems = []
        if self.timesteps is not None and self.timesteps < 1:
            problems.append(
                f"timesteps must be >= 1 or None, got {self.timesteps}"
            )
        if self.stride < 1:
            problems.append(f"stride must be >= 1, got {self.stride}")
        if problems:
            raise ConfigError("; ".join(problems), problems=problems)


def collect_scenario(collector: CollectorConfig, extraction: ExtractionConfig,
                     scenario: Scenario) -> list:
    """Chronological graphs sampled from one scenario."""
    sim = Simulation(scenario)
    emit = [t for t in sim.lifetime if t % collector.stride == 0]
    if collector.temporal and collector.skip_warmup:
        emit = [t for t in emit if t >= extraction.cache_size - 1]
    if collector.timesteps is not None:
        emit = emit[:collector.timesteps]
    out = []
    if collector.temporal:
        extractor = TemporalTrafficExtractor(sim, extraction)
        wanted = set(emit)
        # The window cache only stays contiguous when every timestep is
        # visited, so step densely and emit selectively.
        for t in sim.lifetime:
            graph = extractor.extract(t)
            if t in wanted:
                out.append(graph)
            if len(out) == len(emit):
                break
    else:
        extractor = TrafficExtractor(sim, extraction)
        out = [extractor.extract(t) for t in emit]
    return out


def config_fingerprint(chain: TransformChain, collector: CollectorConfig,
                       extraction: ExtractionConfig) -> str:
    """Stable hash over every extraction-relevant parameter."""
    description = {
        "chain": chain.describe(),
        "collector": asdict(collector),
        "extraction": {
            "v2v": asdict(extraction.v2v),
            "vtv": asdict(extraction.vtv),
            "l2l_types": sorted(extraction.l2l_types),
            "v2l_strategy": extraction.v2l_strategy,
            "n_pad": extraction.n_pad,
            "cache_size": extraction.cache_size,
            "custom_extractors": [
                ex.name for ex in extraction.custom_extractors
            ],
            "temporal_custom_extractors": [
                ex.name for ex in extraction.temporal_custom_extractors
            ],
            "postprocessors": [
                getattr(p, "name", type(p).__name__)
                for p in extraction.postprocessors
            ],
            "temporal_postprocessors": [
                getattr(p, "name", type(p).__name__)
                for p in extraction.temporal_postprocessors
            ],
        },
    }
    blob = json.dumps(description, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _schema_document(extraction: ExtractionConfig,
                     collector: CollectorConfig) -> dict:
    schema, vtv_channels = build_schemas(extraction)
    if collector.temporal:
        schema["vtv"] = vtv_channels
    return {
        store: [{"name": ch.name, "width": ch.width, "unit": ch.unit}
                for ch in channels]
        for store, channels in schema.items()
    }


def _process_scenario(path: str, chain: TransformChain,
                      collector: CollectorConfig,
                      extraction: ExtractionConfig,
                      samples_dir: str) -> dict:
    """Worker: run one scenario file through the full pipeline.

    Returns the file's contribution to the manifest; raising is left to
    the caller's error policy.
    """
    raw = Path(path).read_bytes()
    scenario = parse_scenario(raw)
    transformed = chain(scenario)
    if transformed is None:
        return {"scenario_id": scenario.id, "status": "rejected",
                "entries": []}
    graphs = collect_scenario(collector, extraction, transformed)
    entries = []
    for graph in graphs:
        data = serialize(graph)
        name = f"{graph.scenario_id}_{graph.timestep}.crg"
        (Path(samples_dir) / name).write_bytes(data)
        entries.append({
            "scenario_id": graph.scenario_id,
            "timestep": graph.timestep,
            "file": f"samples/{name}",
            "bytes": len(data),
            "crc32": zlib.crc32(data) & 0xFFFFFFFF,
        })
    return {"scenario_id": scenario.id, "status": "accepted",
            "entries": entries}


def create_dataset(chain: TransformChain, collector: CollectorConfig,
                   extraction: ExtractionConfig, scenario_dir,
                   output_dir, overwrite: bool = False,
                   on_error: str = "abort", workers: int = 1) -> dict:
    """Extract every scenario under `scenario_dir` into `output_dir`.

    Returns the manifest document (also written to disk last, making
    the dataset complete).  `on_error` chooses between aborting the
    whole run and skipping the failing scenario.
    """
    if on_error not in ("abort", "skip"):
        raise ConfigError(f"unknown error policy {on_error!r}")
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    scenario_dir = Path(scenario_dir)
    output_dir = Path(output_dir)
    if not scenario_dir.is_dir():
        raise DatasetError(f"scenario directory {scenario_dir} does not exist")
    if output_dir.exists() and any(output_dir.iterdir()):
        if not overwrite:
            raise DatasetError(
                f"output directory {output_dir} is not empty; pass "
                f"overwrite to replace it"
            )
        manifest_path = output_dir / MANIFEST_NAME
        if manifest_path.exists():
            manifest_path.unlink()
        samples_dir = output_dir / "samples"
        if samples_dir.is_dir():
            for old in samples_dir.glob("*.crg"):
                old.unlink()
    samples_dir = output_dir / "samples"
    samples_dir.mkdir(parents=True, exist_ok=True)

    files = sorted(scenario_dir.glob("*.xml"))
    results = []
    failures = []

    def handle_failure(path, exc):
        if on_error == "abort":
            raise DatasetError(f"scenario {path.name}: {exc}") from exc
        logger.warning("skipping scenario %s: %s", path.name, exc)
        failures.append({"file": path.name, "error": str(exc)})

    if workers == 1 or len(files) <= 1:
        for path in files:
            try:
                results.append(_process_scenario(
                    str(path), chain, collector, extraction, str(samples_dir)
                ))
            except TrafficGraphError as exc:
                handle_failure(path, exc)
    else:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            futures = {
                pool.submit(_process_scenario, str(path), chain, collector,
                            extraction, str(samples_dir)): path
                for path in files
            }
            for future in concurrent.futures.as_completed(futures):
                try:
                    results.append(future.result())
                except TrafficGraphError as exc:
                    handle_failure(futures[future], exc)

    seen_ids = set()
    for res in results:
        if res["scenario_id"] in seen_ids:
            raise DatasetError(
                f"duplicate scenario id {res['scenario_id']!r} across input "
                f"files"
            )
        seen_ids.add(res["scenario_id"])

    index = sorted(
        (entry for res in results for entry in res["entries"]),
        key=lambda e: (e["scenario_id"], e["timestep"]),
    )
    accepted = sum(1 for r in results if r["status"] == "accepted")
    rejected = sum(1 for r in results if r["status"] == "rejected")
    manifest = {
        "format_version": MANIFEST_VERSION,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config_fingerprint": config_fingerprint(chain, collector, extraction),
        "schema": _schema_document(extraction, collector),
        "index": index,
        "counts": {
            "samples": len(index),
            "scenarios_accepted": accepted,
            "scenarios_rejected": rejected,
            "scenarios_failed": len(failures),
        },
        "failures": failures,
    }
    manifest_path = output_dir / MANIFEST_NAME
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


class Dataset:
    """Random-access reader over a dataset directory."""

    def __init__(self, directory):
        self.directory = Path(directory)
        manifest_path = self.directory / MANIFEST_NAME
        if not manifest_path.is_file():
            raise DatasetError(f"no manifest found under {self.directory}")
        try:
            self.manifest = json.loads(manifest_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise DatasetError(f"corrupt manifest {manifest_path}: {exc}") from exc
        if self.manifest.get("format_version") != MANIFEST_VERSION:
            raise DatasetError(
                f"unsupported manifest version "
                f"{self.manifest.get('format_version')!r}"
            )
        self.index = list(self.manifest.get("index", []))

    def __len__(self) -> int:
        return len(self.index)

    @property
    def schema(self) -> dict:
        return self.manifest.get("schema", {})

    def entry(self, i: int) -> dict:
        if not 0 <= i < len(self.index):
            raise IndexError(f"sample index {i} out of range [0, {len(self)})")
        return self.index[i]

    def read_bytes(self, i: int) -> bytes:
        entry = self.entry(i)
        path = self.directory / entry["file"]
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise DatasetError(f"cannot read sample {entry['file']}: {exc}") \
                from exc
        if len(data) != entry["bytes"]:
            raise DatasetError(
                f"sample {entry['file']}: expected {entry['bytes']} bytes, "
                f"found {len(data)}"
            )
        if zlib.crc32(data) & 0xFFFFFFFF != entry["crc32"]:
            raise DatasetError(f"sample {entry['file']}: checksum mismatch")
        return data

    def __getitem__(self, i: int):
        return deserialize(self.read_bytes(i))

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def open_dataset(directory) -> Dataset:
    return Dataset(directory)
