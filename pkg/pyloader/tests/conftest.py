"""Fixture datasets, produced through the engine's own command line.

The loader is exercised strictly against real output: the fixtures run
``trafficgraph extract`` as a subprocess on the bundled scenario files,
once without and once with a temporal window.
"""
import json
import subprocess
import sys
from pathlib import Path

import pytest

SCENARIOS = Path(__file__).parent / "data" / "scenarios"


def _extract(tmp_path_factory, label, overrides):
    root = tmp_path_factory.mktemp(label)
    out = root / "dataset"
    document = {"scenarios": str(SCENARIOS), "output": str(out), **overrides}
    config = root / "run.json"
    config.write_text(json.dumps(document), encoding="utf-8")
    proc = subprocess.run(
        [sys.executable, "-m", "trafficgraph", "extract",
         "--config", str(config)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.fixture(scope="session")
def flat_dataset(tmp_path_factory):
    return _extract(tmp_path_factory, "flat", {"collector": {"stride": 3}})


@pytest.fixture(scope="session")
def temporal_dataset(tmp_path_factory):
    return _extract(tmp_path_factory, "temporal", {
        "vtv": {"t_max": 2},
        "collector": {"stride": 3, "temporal": True, "cache_size": 3},
    })
