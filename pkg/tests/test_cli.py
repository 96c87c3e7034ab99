"""Command-line entry points: run configuration, extract, inspect, validate."""
import json
import os
import shutil
import subprocess
import sys
import zlib
from pathlib import Path

import pytest

from trafficgraph.cli import RunConfiguration, TRANSFORM_REGISTRY, main
from trafficgraph.dataset import open_dataset
from trafficgraph.errors import ConfigError
from trafficgraph.graph import (
    EdgeStore,
    NodeStore,
    TemporalTrafficGraph,
    TrafficGraph,
)
from trafficgraph.serialize import serialize

from scenario_builder import FIXTURE_A_ID, write_fixtures


def base_doc(scenario_dir, out_dir, **extra):
    doc = {"scenarios": str(scenario_dir), "output": str(out_dir)}
    doc.update(extra)
    return doc


def write_config(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def problems_of(excinfo):
    return list(excinfo.value.problems)


@pytest.fixture(scope="module")
def scenarios(tmp_path_factory):
    directory = tmp_path_factory.mktemp("scenarios")
    write_fixtures(directory)
    return directory


@pytest.fixture(scope="module")
def flat_dataset(tmp_path_factory, scenarios):
    """Five flat samples: fixture A at t 0/7/14, fixture B at t 0/7."""
    root = tmp_path_factory.mktemp("flat")
    cfg = write_config(root / "run.json",
                       base_doc(scenarios, root / "out",
                                collector={"stride": 7}))
    assert main(["extract", "--config", cfg]) == 0
    return root / "out"


@pytest.fixture(scope="module")
def temporal_dataset(tmp_path_factory, scenarios):
    root = tmp_path_factory.mktemp("temporal")
    cfg = write_config(
        root / "run.json",
        base_doc(scenarios, root / "out",
                 vtv={"t_max": 2},
                 collector={"stride": 7, "temporal": True, "cache_size": 3}),
    )
    assert main(["extract", "--config", cfg]) == 0
    return root / "out"


class TestRunConfiguration:
    def test_minimal_document_defaults(self):
        run = RunConfiguration.from_document(
            {"scenarios": "in", "output": "out"})
        assert run.scenario_dir == "in"
        assert run.output_dir == "out"
        assert run.chain.describe() == []
        assert run.collector.stride == 1
        assert run.collector.temporal is False
        assert run.extraction.n_pad == 20
        assert run.extraction.cache_size == 1
        assert run.error_policy == "abort"
        assert run.workers == 1
        assert run.overwrite is False

    def test_full_document(self):
        run = RunConfiguration.from_document({
            "scenarios": "in",
            "output": "out",
            "transforms": [
                {"name": "TrafficFilter", "parameters": {"min": 4}},
                {"name": "SegmentLanelets", "parameters": {"size": 25.0}},
            ],
            "v2v": {"kind": "k_nearest", "k": 3},
            "vtv": {"t_max": 2},
            "l2l_types": ["successor", "predecessor"],
            "v2l_strategy": "shape",
            "features": {"n_pad": 12},
            "collector": {"stride": 2, "timesteps": 9, "temporal": True,
                          "skip_warmup": True, "cache_size": 3},
            "error_policy": "skip",
            "workers": 4,
            "overwrite": True,
        })
        assert run.chain.describe() == [
            {"name": "TrafficFilter", "parameters": {"min": 4}},
            {"name": "SegmentLanelets", "parameters": {"size": 25.0}},
        ]
        assert run.extraction.v2v.kind == "k_nearest"
        assert run.extraction.v2v.k == 3
        assert run.extraction.vtv.t_max == 2
        assert run.extraction.l2l_types == frozenset({"successor",
                                                      "predecessor"})
        assert run.extraction.v2l_strategy == "shape"
        assert run.extraction.n_pad == 12
        assert run.extraction.cache_size == 3
        assert run.collector.stride == 2
        assert run.collector.timesteps == 9
        assert run.collector.temporal is True
        assert run.collector.skip_warmup is True
        assert run.error_policy == "skip"
        assert run.workers == 4
        assert run.overwrite is True

    def test_registry_contents(self):
        assert set(TRANSFORM_REGISTRY) == {"TrafficFilter", "SegmentLanelets"}

    def test_document_must_be_object(self):
        with pytest.raises(ConfigError, match="JSON object"):
            RunConfiguration.from_document(["not", "a", "dict"])

    def test_missing_paths_both_reported(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document({})
        problems = problems_of(exc)
        assert any("'scenarios'" in p for p in problems)
        assert any("'output'" in p for p in problems)

    def test_unknown_top_level_keys(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(
                base_doc("in", "out", typo=1, extra=2))
        assert any("unknown configuration key(s): ['extra', 'typo']" in p
                   for p in problems_of(exc))

    def test_unknown_transform_names_registry(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(
                base_doc("in", "out", transforms=[{"name": "Despeckle"}]))
        (problem,) = problems_of(exc)
        assert "transforms[0]" in problem
        assert "'Despeckle'" in problem
        assert "SegmentLanelets" in problem and "TrafficFilter" in problem

    def test_transform_parameter_errors_are_located(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out",
                transforms=[{"name": "TrafficFilter",
                             "parameters": {"wrong": 1}}]))
        (problem,) = problems_of(exc)
        assert problem.startswith("transforms[0] (TrafficFilter):")

    def test_drawer_problems_are_prefixed(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", v2v={"kind": "psychic"}, vtv={"t_max": 0}))
        problems = problems_of(exc)
        assert any(p.startswith("v2v:") for p in problems)
        assert any(p.startswith("vtv:") for p in problems)

    def test_unknown_l2l_type(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", l2l_types=["successor", "sideways"]))
        assert any("l2l_types" in p and "sideways" in p
                   for p in problems_of(exc))

    def test_unknown_feature_key(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", features={"n_pad": 8, "polish": True}))
        assert any("features: unknown key(s) ['polish']" in p
                   for p in problems_of(exc))

    def test_unknown_collector_key(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", collector={"cadence": 3}))
        assert any(p.startswith("collector:") and "cadence" in p
                   for p in problems_of(exc))

    def test_temporal_needs_cache(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", collector={"temporal": True}))
        assert any("cache_size >= 2" in p for p in problems_of(exc))

    def test_extraction_level_problems_surface(self):
        # t_max has to fit inside the rolling cache.
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", vtv={"t_max": 3}, collector={"cache_size": 2}))
        assert any("exceeds" in p for p in problems_of(exc))

    def test_error_policy_and_workers_checked(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document(base_doc(
                "in", "out", error_policy="retry", workers=0))
        problems = problems_of(exc)
        assert any("error_policy" in p for p in problems)
        assert any("workers" in p for p in problems)

    def test_every_problem_reported_at_once(self):
        with pytest.raises(ConfigError) as exc:
            RunConfiguration.from_document({
                "scenarios": "in",
                "transforms": [{"name": "Despeckle"}],
                "v2v": {"kind": "psychic"},
                "features": {"polish": True},
                "error_policy": "retry",
                "workers": -2,
                "typo": 1,
            })
        problems = problems_of(exc)
        assert len(problems) >= 7
        assert str(len(problems)) in str(exc.value)
        joined = "\n".join(problems)
        for needle in ("'output'", "Despeckle", "psychic", "polish",
                       "error_policy", "workers", "typo"):
            assert needle in joined

    def test_from_file_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            RunConfiguration.from_file(tmp_path / "nope.json")

    def test_from_file_bad_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{broken", encoding="utf-8")
        with pytest.raises(ConfigError, match="not valid JSON"):
            RunConfiguration.from_file(path)

    def test_from_file_roundtrip(self, tmp_path):
        path = tmp_path / "run.json"
        write_config(path, base_doc("in", "out", workers=2))
        run = RunConfiguration.from_file(path)
        assert run.workers == 2


class TestExtract:
    def test_reports_summary(self, tmp_path, scenarios, capsys):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7}))
        assert main(["extract", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "wrote 5 samples from 2 scenario(s)" in out
        assert "0 rejected, 0 failed" in out
        assert len(open_dataset(tmp_path / "out")) == 5

    def test_json_summary(self, tmp_path, scenarios, capsys):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7}))
        assert main(["extract", "--config", cfg, "--json"]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["samples"] == 5
        assert summary["scenarios_accepted"] == 2
        assert summary["scenarios_rejected"] == 0
        assert summary["scenarios_failed"] == 0
        assert summary["output"] == str(tmp_path / "out")
        assert summary["seconds"] >= 0

    def test_config_problems_exit_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "run.json",
                           {"output": "out", "workers": 0, "typo": 1})
        assert main(["extract", "--config", cfg]) == 2
        err = capsys.readouterr().err
        lines = [l for l in err.splitlines() if l.startswith("config error:")]
        assert len(lines) == 3
        assert any("'scenarios'" in l for l in lines)
        assert any("workers" in l for l in lines)
        assert any("typo" in l for l in lines)

    def test_missing_config_exits_two(self, tmp_path, capsys):
        assert main(["extract", "--config", str(tmp_path / "no.json")]) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_runtime_failure_exits_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(tmp_path / "missing", tmp_path / "out"))
        assert main(["extract", "--config", cfg]) == 1
        assert "error:" in capsys.readouterr().err

    def test_refuses_occupied_output(self, tmp_path, scenarios, capsys):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7}))
        assert main(["extract", "--config", cfg]) == 0
        assert main(["extract", "--config", cfg]) == 1
        assert "not empty" in capsys.readouterr().err
        assert main(["extract", "--config", cfg, "--overwrite"]) == 0

    def test_overwrite_from_document(self, tmp_path, scenarios):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7}, overwrite=True))
        assert main(["extract", "--config", cfg]) == 0
        assert main(["extract", "--config", cfg]) == 0

    def test_out_flag_overrides_document(self, tmp_path, scenarios):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "from_doc",
                                    collector={"stride": 7}))
        other = tmp_path / "from_flag"
        assert main(["extract", "--config", cfg, "--out", str(other)]) == 0
        assert (other / "manifest.json").is_file()
        assert not (tmp_path / "from_doc").exists()

    def test_workers_flag(self, tmp_path, scenarios):
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7}))
        assert main(["extract", "--config", cfg, "--workers", "2"]) == 0
        assert len(open_dataset(tmp_path / "out")) == 5


class TestInspect:
    def test_default_shows_first_sample(self, flat_dataset, capsys):
        assert main(["inspect", str(flat_dataset)]) == 0
        out = capsys.readouterr().out
        assert "sample 0/5" in out
        assert f"scenario '{FIXTURE_A_ID}'" in out
        assert "timestep 0" in out
        assert "nodes[l]:" in out and "nodes[v]:" in out
        assert "edges[l2l]:" in out and "edges[v2l]:" in out
        assert "x 84 columns" in out  # lanelet row width at n_pad=20
        assert "schema[v]: position(2)" in out
        assert "temporal window" not in out

    def test_index_flag(self, flat_dataset, capsys):
        assert main(["inspect", str(flat_dataset), "--index", "3"]) == 0
        out = capsys.readouterr().out
        assert "sample 3/5" in out

    def test_index_out_of_range(self, flat_dataset, capsys):
        assert main(["inspect", str(flat_dataset), "--index", "99"]) == 1
        assert "out of range" in capsys.readouterr().err

    def test_stats_skip_padding(self, flat_dataset, capsys):
        assert main(["inspect", str(flat_dataset), "--index", "1",
                     "--stats"]) == 0
        out = capsys.readouterr().out
        stats = [l for l in out.splitlines() if "stats[" in l]
        assert any("stats[v.velocity]" in l for l in stats)
        assert any("stats[v2l.arclength_normalized]" in l for l in stats)
        # the NaN tail that pads short lanelet polylines must not poison
        # the summary of the finite entries
        (left,) = [l for l in stats if "stats[l.left_vertices]" in l]
        assert "nan" not in left

    def test_temporal_window_is_shown(self, temporal_dataset, capsys):
        assert main(["inspect", str(temporal_dataset), "--index", "1"]) == 0
        out = capsys.readouterr().out
        assert "temporal window: 5..7" in out
        assert "edges[vtv]:" in out

    def test_empty_dataset(self, tmp_path, capsys):
        (tmp_path / "manifest.json").write_text(
            json.dumps({"format_version": 1, "index": []}), encoding="utf-8")
        assert main(["inspect", str(tmp_path)]) == 0
        assert "0 samples" in capsys.readouterr().out

    def test_unreadable_dataset(self, tmp_path, capsys):
        assert main(["inspect", str(tmp_path / "void")]) == 1
        assert "no manifest" in capsys.readouterr().err


def _replace_sample(directory, position, graph):
    """Swap one sample's payload while keeping the manifest checksums valid."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    manifest = json.loads(manifest_path.read_text("utf-8"))
    entry = manifest["index"][position]
    data = serialize(graph)
    (directory / entry["file"]).write_bytes(data)
    entry["bytes"] = len(data)
    entry["crc32"] = zlib.crc32(data) & 0xFFFFFFFF
    manifest_path.write_text(json.dumps(manifest), encoding="utf-8")


class TestValidate:
    def test_clean_dataset_passes(self, flat_dataset, capsys):
        assert main(["validate", str(flat_dataset)]) == 0
        assert "ok: 5 sample(s)" in capsys.readouterr().out

    def test_clean_temporal_dataset_passes(self, temporal_dataset, capsys):
        assert main(["validate", str(temporal_dataset)]) == 0
        assert "ok: 5 sample(s)" in capsys.readouterr().out

    def test_flipped_byte_is_reported(self, flat_dataset, tmp_path, capsys):
        broken = tmp_path / "ds"
        shutil.copytree(flat_dataset, broken)
        manifest = json.loads((broken / "manifest.json").read_text("utf-8"))
        victim = broken / manifest["index"][2]["file"]
        blob = bytearray(victim.read_bytes())
        blob[len(blob) // 2] ^= 0xFF
        victim.write_bytes(bytes(blob))
        assert main(["validate", str(broken)]) == 1
        out = capsys.readouterr().out
        assert "checksum mismatch" in out
        assert "1 violation(s) in 5 sample(s)" in out

    def test_angle_out_of_range_is_reported(self, flat_dataset, tmp_path,
                                            capsys):
        broken = tmp_path / "ds"
        shutil.copytree(flat_dataset, broken)
        dataset = open_dataset(broken)
        position = next(i for i in range(len(dataset))
                        if len(dataset[i].nodes["v"]))
        graph = dataset[position]
        v = graph.nodes["v"]
        x = v.x.copy()
        x[:, v.channel_slice("orientation")] = 4.0
        bad = NodeStore("v", v.ids.copy(), x, v.channels)
        _replace_sample(broken, position, TrafficGraph(
            graph.scenario_id, graph.timestep, graph.dt,
            {**graph.nodes, "v": bad}, dict(graph.edges)))
        assert main(["validate", str(broken)]) == 1
        out = capsys.readouterr().out
        assert "v.orientation: angle outside (-pi, pi]" in out

    def test_stale_time_delta_is_reported(self, temporal_dataset, tmp_path,
                                          capsys):
        broken = tmp_path / "ds"
        shutil.copytree(temporal_dataset, broken)
        dataset = open_dataset(broken)
        position = next(i for i in range(len(dataset))
                        if len(dataset[i].edges["vtv"]))
        graph = dataset[position]
        vtv = graph.edges["vtv"]
        x = vtv.x.copy()
        x[:, vtv.channel_slice("time_delta")] = 0.0
        bad = EdgeStore("vtv", vtv.edge_index.copy(), x, vtv.channels)
        _replace_sample(broken, position, TemporalTrafficGraph(
            graph.scenario_id, graph.timestep, graph.dt,
            dict(graph.nodes), {**graph.edges, "vtv": bad},
            window=graph.window))
        assert main(["validate", str(broken)]) == 1
        out = capsys.readouterr().out
        assert "vtv.time_delta: non-positive elapsed time" in out

    def test_missing_dataset_exits_one(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "void")]) == 1
        assert "no manifest" in capsys.readouterr().err


class TestParser:
    def test_no_command_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_extract_requires_config(self):
        with pytest.raises(SystemExit) as exc:
            main(["extract"])
        assert exc.value.code == 2

    def test_log_level_env(self, tmp_path, scenarios):
        # logging.basicConfig is once-per-process, so exercise the env knob
        # through a fresh interpreter (which also covers `-m trafficgraph`)
        cfg = write_config(tmp_path / "run.json",
                           base_doc(scenarios, tmp_path / "out",
                                    collector={"stride": 7, "timesteps": 1}))
        chatty = subprocess.run(
            [sys.executable, "-m", "trafficgraph",
             "extract", "--config", cfg, "--overwrite"],
            capture_output=True, text=True,
            env=dict(os.environ, TRAFFICGRAPH_LOG="info"),
        )
        assert chatty.returncode == 0
        assert "extraction finished" in chatty.stderr
        quiet = subprocess.run(
            [sys.executable, "-m", "trafficgraph",
             "extract", "--config", cfg, "--overwrite"],
            capture_output=True, text=True,
            env=dict(os.environ, TRAFFICGRAPH_LOG="error"),
        )
        assert quiet.returncode == 0
        assert "extraction finished" not in quiet.stderr
