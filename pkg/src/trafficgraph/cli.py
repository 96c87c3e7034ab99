"""Command-line interface: dataset extraction, inspection, validation.

The `extract` command is driven by a single JSON configuration document
(reproducible and fingerprintable) with a few override flags.  Progress
and diagnostics go to stderr; `--json` puts a machine-readable summary
on stdout.  `TRAFFICGRAPH_LOG` (error|warn|info|debug) controls log
verbosity.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .builders import ALL_L2L_TYPES
from .dataset import CollectorConfig, create_dataset, open_dataset
from .drawers import V2VDrawerConfig, VTVDrawerConfig
from .errors import ConfigError, TrafficGraphError
from .extractor import ExtractionConfig
from .graph import validate_graph
from .pipeline import SegmentLanelets, TrafficFilter, TransformChain

__all__ = ["RunConfiguration", "TRANSFORM_REGISTRY", "main"]

logger = logging.getLogger("trafficgraph")

TRANSFORM_REGISTRY = {
    "TrafficFilter": TrafficFilter,
    "SegmentLanelets": SegmentLanelets,
}

_ANGLE_CHANNELS = {"orientation", "relative_orientation", "heading_error"}


@dataclass(frozen=True)
class RunConfiguration:
    """Validated extraction run, assembled from a JSON document."""

    scenario_dir: str
    output_dir: str
    chain: TransformChain
    collector: CollectorConfig
    extraction: ExtractionConfig
    error_policy: str = "abort"
    workers: int = 1
    overwrite: bool = False

    @classmethod
    def from_document(cls, document: dict) -> "RunConfiguration":
        """Build and validate; reports every problem at once."""
        if not isinstance(document, dict):
            raise ConfigError("run configuration must be a JSON object")
        doc = dict(document)
        problems = []

        def sub_config(factory, payload, where):
            try:
                return factory(**payload)
            except ConfigError as exc:
                problems.extend(f"{where}: {p}" for p in exc.problems)
            except TypeError as exc:
                problems.append(f"{where}: {exc}")
            return None

        scenario_dir = doc.pop("scenarios", None)
        if not isinstance(scenario_dir, str) or not scenario_dir:
            problems.append("'scenarios' must be a path string")
        output_dir = doc.pop("output", None)
        if not isinstance(output_dir, str) or not output_dir:
            problems.append("'output' must be a path string")

        elements = []
        for i, spec_item in enumerate(doc.pop("transforms", []) or []):
            name = spec_item.get("name") if isinstance(spec_item, dict) else None
            if name not in TRANSFORM_REGISTRY:
                problems.append(
                    f"transforms[{i}]: unknown transform {name!r}; known: "
                    f"{sorted(TRANSFORM_REGISTRY)}"
                )
                continue
            params = spec_item.get("parameters", {})
            element = sub_config(TRANSFORM_REGISTRY[name], params,
                                 f"transforms[{i}] ({name})")
            if element is not None:
                elements.append(element)

        v2v = sub_config(V2VDrawerConfig, doc.pop("v2v", {}) or {}, "v2v")
        vtv = sub_config(VTVDrawerConfig, doc.pop("vtv", {}) or {}, "vtv")

        l2l_types = doc.pop("l2l_types", None)
        if l2l_types is None:
            l2l_types = frozenset(ALL_L2L_TYPES)
        else:
            unknown = set(l2l_types) - ALL_L2L_TYPES
            if unknown:
                problems.append(
                    f"l2l_types: unknown relation type(s) {sorted(unknown)}"
                )
            l2l_types = frozenset(l2l_types) & ALL_L2L_TYPES

        v2l_strategy = doc.pop("v2l_strategy", "center")
        features = doc.pop("features", {}) or {}
        n_pad = features.pop("n_pad", 20)
        if features:
            problems.append(f"features: unknown key(s) {sorted(features)}")

        collector_doc = doc.pop("collector", {}) or {}
        cache_size = collector_doc.pop("cache_size", 1)
        collector = sub_config(CollectorConfig, collector_doc, "collector")
        if collector is not None and collector.temporal and cache_size < 2:
            problems.append(
                "collector: temporal extraction needs cache_size >= 2"
            )

        error_policy = doc.pop("error_policy", "abort")
        if error_policy not in ("abort", "skip"):
            problems.append(
                f"error_policy must be 'abort' or 'skip', got {error_policy!r}"
            )
        workers = doc.pop("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            problems.append(f"workers must be a positive integer, got {workers!r}")
        overwrite = bool(doc.pop("overwrite", False))

        if doc:
            problems.append(f"unknown configuration key(s): {sorted(doc)}")

        extraction = None
        if v2v is not None and vtv is not None:
            try:
                extraction = ExtractionConfig(
                    v2v=v2v, vtv=vtv, l2l_types=l2l_types,
                    v2l_strategy=v2l_strategy, n_pad=n_pad,
                    cache_size=cache_size,
                )
            except ConfigError as exc:
                problems.extend(exc.problems)

        if problems:
            raise ConfigError(
                f"{len(problems)} configuration problem(s)", problems=problems
            )
        return cls(
            scenario_dir=scenario_dir, output_dir=output_dir,
            chain=TransformChain(elements), collector=collector,
            extraction=extraction, error_policy=error_policy,
            workers=workers, overwrite=overwrite,
        )

    @classmethod
    def from_file(cls, path) -> "RunConfiguration":
        try:
            document = json.loads(Path(path).read_text("utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration {path} is not valid JSON: {exc}")
        return cls.from_document(document)


def _setup_logging():
    levels = {"error": logging.ERROR, "warn": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    name = os.environ.get("TRAFFICGRAPH_LOG", "warn").lower()
    logging.basicConfig(
        stream=sys.stderr,
        level=levels.get(name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )


def cmd_extract(args) -> int:
    try:
        run = RunConfiguration.from_file(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    output_dir = args.out or run.output_dir
    workers = args.workers or run.workers
    overwrite = args.overwrite or run.overwrite
    started = time.monotonic()
    try:
        manifest = create_dataset(
            run.chain, run.collector, run.extraction,
            run.scenario_dir, output_dir,
            overwrite=overwrite, on_error=run.error_policy, workers=workers,
        )
    except TrafficGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.monotonic() - started
    summary = {
        "output": str(output_dir),
        "samples": manifest["counts"]["samples"],
        "scenarios_accepted": manifest["counts"]["scenarios_accepted"],
        "scenarios_rejected": manifest["counts"]["scenarios_rejected"],
        "scenarios_failed": manifest["counts"]["scenarios_failed"],
        "seconds": round(elapsed, 3),
    }
    logger.info("extraction finished in %.3fs", elapsed)
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(
            f"wrote {summary['samples']} samples from "
            f"{summary['scenarios_accepted']} scenario(s) to {output_dir} "
            f"({summary['scenarios_rejected']} rejected, "
            f"{summary['scenarios_failed']} failed, {elapsed:.2f}s)"
        )
    return 0


def _channel_stats(store_x: np.ndarray, channels) -> list:
    out = []
    offset = 0
    for ch in channels:
        block = store_x[:, offset:offset + ch["width"]]
        offset += ch["width"]
        finite = block[np.isfinite(block)]
        if finite.size:
            out.append((ch["name"], float(finite.min()), float(finite.max()),
                        float(finite.mean())))
        else:
            out.append((ch["name"], math.nan, math.nan, math.nan))
    return out


def cmd_inspect(args) -> int:
    try:
        dataset = open_dataset(args.dataset)
    except TrafficGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if len(dataset) == 0 and args.index is None:
        print("0 samples")
        return 0
    index = 0 if args.index is None else args.index
    try:
        entry = dataset.entry(index)
        graph = dataset[index]
    except (IndexError, TrafficGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"sample {index}/{len(dataset)}: scenario {graph.scenario_id!r} "
          f"timestep {graph.timestep} ({entry['bytes']} bytes)")
    if graph.window:
        print(f"  temporal window: {graph.window[0]}..{graph.window[1]}")
    for node_type in sorted(graph.nodes):
        store = graph.nodes[node_type]
        print(f"  nodes[{node_type}]: {len(store)} rows x "
              f"{store.x.shape[1]} columns")
    for relation in sorted(graph.edges):
        store = graph.edges[relation]
        print(f"  edges[{relation}]: {len(store)} rows x "
              f"{store.x.shape[1]} columns")
    schema = dataset.schema
    for store_key in sorted(schema):
        names = ", ".join(
            f"{ch['name']}({ch['width']})" for ch in schema[store_key]
        )
        print(f"  schema[{store_key}]: {names}")
    if args.stats:
        for store_key in sorted(graph.nodes):
            store = graph.nodes[store_key]
            for name, lo, hi, mean in _channel_stats(
                store.x, schema.get(store_key, ())
            ):
                print(f"  stats[{store_key}.{name}]: min={lo:.6g} "
                      f"max={hi:.6g} mean={mean:.6g}")
        for store_key in sorted(graph.edges):
            store = graph.edges[store_key]
            for name, lo, hi, mean in _channel_stats(
                store.x, schema.get(store_key, ())
            ):
                print(f"  stats[{store_key}.{name}]: min={lo:.6g} "
                      f"max={hi:.6g} mean={mean:.6g}")
    return 0


def _angle_violations(graph) -> list:
    """Angle channels must lie in (-pi, pi]; normalized arclengths in [0, 1]."""
    problems = []
    stores = list(graph.nodes.items()) + list(graph.edges.items())
    for store_key, store in stores:
        offset = 0
        for ch in store.channels:
            block = store.x[:, offset:offset + ch.width]
            offset += ch.width
            finite = block[np.isfinite(block)]
            if not finite.size:
                continue
            if ch.name in _ANGLE_CHANNELS:
                lo, hi = float(finite.min()), float(finite.max())
                # float32 rounding of a wrapped angle may land one ulp
                # past the open/closed interval ends.
                tol = 4 * np.finfo(np.float32).eps * np.pi
                if lo < -np.pi - tol or hi > np.pi + tol:
                    problems.append(
                        f"{store_key}.{ch.name}: angle outside (-pi, pi]: "
                        f"[{lo}, {hi}]"
                    )
            if ch.name == "arclength_normalized":
                if finite.min() < 0 or finite.max() > 1:
                    problems.append(
                        f"{store_key}.{ch.name}: outside [0, 1]: "
                        f"[{finite.min()}, {finite.max()}]"
                    )
    return problems


def _vtv_violations(graph) -> list:
    problems = []
    vtv = graph.edges.get("vtv")
    if vtv is None or not len(vtv):
        return problems
    dt_col = vtv.x[:, vtv.channel_slice("time_delta")]
    if not (dt_col > 0).all():
        problems.append("vtv.time_delta: non-positive elapsed time")
    return problems


def cmd_validate(args) -> int:
    try:
        dataset = open_dataset(args.dataset)
    except TrafficGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    violations = []
    for i in range(len(dataset)):
        entry = dataset.entry(i)
        try:
            graph = dataset[i]
        except TrafficGraphError as exc:
            violations.append(f"{entry['file']}: {exc}")
            continue
        try:
            validate_graph(graph)
        except TrafficGraphError as exc:
            violations.append(f"{entry['file']}: {exc}")
        for problem in _angle_violations(graph) + _vtv_violations(graph):
            violations.append(f"{entry['file']}: {problem}")
    if violations:
        for line in violations:
            print(f"violation: {line}")
        print(f"{len(violations)} violation(s) in {len(dataset)} sample(s)")
        return 1
    print(f"ok: {len(dataset)} sample(s) pass all checks")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trafficgraph",
        description="Extract heterogeneous graph datasets from recorded "
                    "traffic scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="run a dataset extraction")
    p_extract.add_argument("--config", required=True,
                           help="path to the JSON run configuration")
    p_extract.add_argument("--out", help="override the output directory")
    p_extract.add_argument("--workers", type=int,
                           help="override the worker count")
    p_extract.add_argument("--overwrite", action="store_true",
                           help="replace a non-empty output directory")
    p_extract.add_argument("--json", action="store_true",
                           help="print a JSON summary to stdout")
    p_extract.set_defaults(func=cmd_extract)

    p_inspect = sub.add_parser("inspect", help="summarize one sample")
    p_inspect.add_argument("dataset", help="dataset directory")
    p_inspect.add_argument("--index", type=int, default=None,
                           help="sample index (default 0)")
    p_inspect.add_argument("--stats", action="store_true",
                           help="per-channel min/max/mean")
    p_inspect.set_defaults(func=cmd_inspect)

    p_validate = sub.add_parser("validate",
                                help="check every sample of a dataset")
    p_validate.add_argument("dataset", help="dataset directory")
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[list] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
