"""Dataset collection: sampling arithmetic, manifest, reader integrity."""
import json

import pytest

from trafficgraph.dataset import (
    CollectorConfig,
    Dataset,
    collect_scenario,
    config_fingerprint,
    create_dataset,
    open_dataset,
)
from trafficgraph.drawers import V2VDrawerConfig, VTVDrawerConfig
from trafficgraph.errors import ConfigError, DatasetError
from trafficgraph.extractor import ExtractionConfig
from trafficgraph.graph import TemporalTrafficGraph, TrafficGraph
from trafficgraph.pipeline import TrafficFilter, TransformChain

from scenario_builder import (
    FIXTURE_A_ID,
    FIXTURE_B_ID,
    build_fixture_b,
    cruise,
    straight_lanelet,
    write_fixtures,
)
from trafficgraph.scenario import Scenario

EXTRACT = ExtractionConfig()
NO_CHAIN = TransformChain()


def ten_step_scenario():
    """Single vehicle alive for exactly timesteps 0..9."""
    return Scenario(
        id="T_Lifetime-1", dt=0.1,
        lanelets={1: straight_lanelet(1, (0, 0), (200, 0))},
        obstacles={9: cruise(9, (1.0, 0.0), 0.0, 10.0, 0, 9, 0.1)},
    )


@pytest.fixture()
def scenario_dir(tmp_path):
    d = tmp_path / "scenarios"
    write_fixtures(d)
    return d


class TestCollectorConfig:
    def test_validation_collects_problems(self):
        with pytest.raises(ConfigError) as info:
            CollectorConfig(timesteps=0, stride=0)
        assert len(info.value.problems) == 2

    def test_defaults(self):
        config = CollectorConfig()
        assert config.timesteps is None and config.stride == 1
        assert not config.temporal and not config.skip_warmup


class TestCollectScenario:
    def test_full_lifetime(self):
        graphs = collect_scenario(CollectorConfig(), EXTRACT,
                                  ten_step_scenario())
        assert [g.timestep for g in graphs] == list(range(10))
        assert all(type(g) is TrafficGraph for g in graphs)

    def test_stride_keeps_every_other_step(self):
        graphs = collect_scenario(CollectorConfig(stride=2), EXTRACT,
                                  ten_step_scenario())
        assert [g.timestep for g in graphs] == [0, 2, 4, 6, 8]

    def test_timestep_cap(self):
        graphs = collect_scenario(CollectorConfig(timesteps=3, stride=2),
                                  EXTRACT, ten_step_scenario())
        assert [g.timestep for g in graphs] == [0, 2, 4]

    def test_temporal_skip_warmup(self):
        collector = CollectorConfig(temporal=True, skip_warmup=True)
        extraction = ExtractionConfig(cache_size=5)
        graphs = collect_scenario(collector, extraction, ten_step_scenario())
        assert [g.timestep for g in graphs] == [4, 5, 6, 7, 8, 9]
        assert all(isinstance(g, TemporalTrafficGraph) for g in graphs)
        # the first emitted window is already full
        assert graphs[0].window == (0, 4)
        assert graphs[-1].window == (5, 9)

    def test_temporal_windows_stay_contiguous_under_stride(self):
        collector = CollectorConfig(temporal=True, stride=3)
        extraction = ExtractionConfig(cache_size=3)
        graphs = collect_scenario(collector, extraction, ten_step_scenario())
        assert [g.timestep for g in graphs] == [0, 3, 6, 9]
        # strided emission still advances the cache step by step
        assert graphs[1].window == (1, 3)
        assert graphs[2].window == (4, 6)

    def test_temporal_cap_stops_early(self):
        collector = CollectorConfig(temporal=True, timesteps=2)
        graphs = collect_scenario(collector, ExtractionConfig(cache_size=2),
                                  ten_step_scenario())
        assert [g.timestep for g in graphs] == [0, 1]


class TestFingerprint:
    def test_stable_for_equal_configuration(self):
        a = config_fingerprint(TrafficFilter(min=3) >> TransformChain(),
                               CollectorConfig(stride=2), ExtractionConfig())
        b = config_fingerprint(TransformChain((TrafficFilter(min=3),)),
                               CollectorConfig(stride=2), ExtractionConfig())
        assert a == b
        assert a.startswith("sha256:") and len(a) == len("sha256:") + 64

    def test_every_knob_changes_the_fingerprint(self):
        class Named:
            def __init__(self, name):
                self.name = name
                self.store = "v"
                self.channels = ()

            def __call__(self, context):  # pragma: no cover - never run
                return None

        variants = [
            (NO_CHAIN, CollectorConfig(), ExtractionConfig()),
            (TransformChain((TrafficFilter(min=3),)), CollectorConfig(),
             ExtractionConfig()),
            (NO_CHAIN, CollectorConfig(stride=2), ExtractionConfig()),
            (NO_CHAIN, CollectorConfig(temporal=True), ExtractionConfig()),
            (NO_CHAIN, CollectorConfig(),
             ExtractionConfig(v2v=V2VDrawerConfig(kind="radius", radius=30.0))),
            (NO_CHAIN, CollectorConfig(),
             ExtractionConfig(vtv=VTVDrawerConfig(t_max=1))),
            (NO_CHAIN, CollectorConfig(),
             ExtractionConfig(l2l_types=frozenset({"successor"}))),
            (NO_CHAIN, CollectorConfig(),
             ExtractionConfig(v2l_strategy="shape")),
            (NO_CHAIN, CollectorConfig(), ExtractionConfig(n_pad=10)),
            (NO_CHAIN, CollectorConfig(), ExtractionConfig(cache_size=4)),
            (NO_CHAIN, CollectorConfig(),
             ExtractionConfig(custom_extractors=(Named("extra"),))),
        ]
        prints = {config_fingerprint(*v) for v in variants}
        assert len(prints) == len(variants)


class TestCreateDataset:
    def test_writes_manifest_last_and_index_sorted(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        manifest = create_dataset(NO_CHAIN, CollectorConfig(stride=3), EXTRACT,
                                  scenario_dir, out)
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest
        keys = [(e["scenario_id"], e["timestep"]) for e in manifest["index"]]
        assert keys == sorted(keys)
        assert keys == [(FIXTURE_A_ID, t) for t in (0, 3, 6, 9, 12)] + \
                       [(FIXTURE_B_ID, t) for t in (0, 3, 6)]
        assert manifest["counts"] == {
            "samples": 8, "scenarios_accepted": 2, "scenarios_rejected": 0,
            "scenarios_failed": 0,
        }
        for entry in manifest["index"]:
            assert (out / entry["file"]).is_file()

    def test_rejected_scenarios_leave_no_samples(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        chain = TransformChain((TrafficFilter(min=10),))
        manifest = create_dataset(chain, CollectorConfig(stride=5), EXTRACT,
                                  scenario_dir, out)
        ids = {e["scenario_id"] for e in manifest["index"]}
        assert ids == {FIXTURE_A_ID}  # the 9-vehicle scenario is filtered out
        assert manifest["counts"]["scenarios_rejected"] == 1
        assert manifest["counts"]["scenarios_accepted"] == 1

    def test_refuses_nonempty_output(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        (out / "precious.txt").write_text("keep me")
        with pytest.raises(DatasetError, match="not empty"):
            create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                           scenario_dir, out)

    def test_overwrite_replaces_previous_samples(self, scenario_dir, tmp_path):
        out = tmp_path / "out"
        create_dataset(NO_CHAIN, CollectorConfig(stride=3), EXTRACT,
                       scenario_dir, out)
        stale = out / "samples" / "ZZZ_stale-1_0.crg"
        stale.write_bytes(b"stale")
        manifest = create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                                  scenario_dir, out, overwrite=True)
        assert not stale.exists()
        listed = {(out / e["file"]).name for e in manifest["index"]}
        on_disk = {p.name for p in (out / "samples").glob("*.crg")}
        assert listed == on_disk

    def test_reruns_are_byte_identical(self, scenario_dir, tmp_path):
        outs = []
        for sub in ("one", "two"):
            out = tmp_path / sub
            create_dataset(NO_CHAIN, CollectorConfig(stride=3), EXTRACT,
                           scenario_dir, out)
            outs.append(out)
        a, b = (json.loads((o / "manifest.json").read_text()) for o in outs)
        a.pop("created"), b.pop("created")
        assert a == b
        for entry in a["index"]:
            assert (outs[0] / entry["file"]).read_bytes() == \
                   (outs[1] / entry["file"]).read_bytes()

    def test_error_policy_skip_records_failures(self, scenario_dir, tmp_path):
        (scenario_dir / "AAA_broken-1.xml").write_text("<commonRoad")
        out = tmp_path / "out"
        manifest = create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                                  scenario_dir, out, on_error="skip")
        assert manifest["counts"]["scenarios_failed"] == 1
        assert manifest["counts"]["scenarios_accepted"] == 2
        assert manifest["failures"][0]["file"] == "AAA_broken-1.xml"
        assert "error" in manifest["failures"][0]

    def test_error_policy_abort_raises(self, scenario_dir, tmp_path):
        (scenario_dir / "AAA_broken-1.xml").write_text("<commonRoad")
        with pytest.raises(DatasetError, match="AAA_broken-1.xml"):
            create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                           scenario_dir, tmp_path / "out")

    def test_duplicate_scenario_ids_rejected(self, scenario_dir, tmp_path):
        first = scenario_dir / f"{FIXTURE_A_ID}.xml"
        (scenario_dir / "ZZZ_copy.xml").write_bytes(first.read_bytes())
        with pytest.raises(DatasetError, match="duplicate scenario id"):
            create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                           scenario_dir, tmp_path / "out")

    def test_parallel_run_matches_serial(self, scenario_dir, tmp_path):
        serial = create_dataset(NO_CHAIN, CollectorConfig(stride=4), EXTRACT,
                                scenario_dir, tmp_path / "serial")
        parallel = create_dataset(NO_CHAIN, CollectorConfig(stride=4), EXTRACT,
                                  scenario_dir, tmp_path / "parallel",
                                  workers=2)
        serial.pop("created"), parallel.pop("created")
        assert serial == parallel

    def test_temporal_schema_includes_vtv(self, scenario_dir, tmp_path):
        manifest = create_dataset(
            NO_CHAIN, CollectorConfig(stride=5, temporal=True),
            ExtractionConfig(cache_size=3), scenario_dir, tmp_path / "out",
        )
        assert "vtv" in manifest["schema"]
        flat = create_dataset(NO_CHAIN, CollectorConfig(stride=5), EXTRACT,
                              scenario_dir, tmp_path / "flat")
        assert "vtv" not in flat["schema"]

    def test_bad_arguments(self, scenario_dir, tmp_path):
        with pytest.raises(ConfigError):
            create_dataset(NO_CHAIN, CollectorConfig(), EXTRACT, scenario_dir,
                           tmp_path / "out", on_error="retry")
        with pytest.raises(ConfigError):
            create_dataset(NO_CHAIN, CollectorConfig(), EXTRACT, scenario_dir,
                           tmp_path / "out", workers=0)
        with pytest.raises(DatasetError, match="does not exist"):
            create_dataset(NO_CHAIN, CollectorConfig(), EXTRACT,
                           tmp_path / "missing", tmp_path / "out")


class TestDatasetReader:
    @pytest.fixture()
    def built(self, scenario_dir, tmp_path):
        out = tmp_path / "dataset"
        create_dataset(NO_CHAIN, CollectorConfig(stride=3), EXTRACT,
                       scenario_dir, out)
        return out

    def test_random_access(self, built):
        ds = open_dataset(built)
        assert len(ds) == 8
        graph = ds[0]
        assert graph.scenario_id == ds.entry(0)["scenario_id"]
        assert graph.timestep == ds.entry(0)["timestep"]
        assert {g.timestep for g in ds} == {0, 3, 6, 9, 12}
        assert "v" in ds.schema and "l2l" in ds.schema
        with pytest.raises(IndexError):
            ds.entry(8)

    def test_flipped_byte_is_detected(self, built):
        ds = Dataset(built)
        path = built / ds.entry(2)["file"]
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(DatasetError, match="checksum mismatch"):
            ds.read_bytes(2)

    def test_truncated_sample_is_detected(self, built):
        ds = Dataset(built)
        path = built / ds.entry(1)["file"]
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(DatasetError, match="bytes"):
            ds.read_bytes(1)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DatasetError, match="manifest"):
            Dataset(tmp_path)

    def test_unsupported_manifest_version(self, built):
        manifest = json.loads((built / "manifest.json").read_text())
        manifest["format_version"] = 99
        (built / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(DatasetError, match="version"):
            Dataset(built)
