"""Single-timestep and temporal-window graph extraction.

`TrafficExtractor` turns one simulation timestep into a graph: read the
vehicle states, draw vehicle interaction edges, attach the (cached,
static) map relations and vehicle-to-lanelet assignments, run the
feature extractors, then the postprocessors.  The temporal variant
keeps a bounded cache of recent single-step graphs, merges them into a
window, and links realizations of the same vehicle across time.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .builders import (
    ALL_L2L_TYPES,
    build_l2l_edges,
    build_v2l_edges,
    mirror_v2l_edges,
)
from .drawers import V2VDrawerConfig, VTVDrawerConfig, draw_v2v, draw_vtv_pairs
from .errors import ConfigError, ExtractionError
from .features import (
    DEFAULT_N_PAD,
    FeatureContext,
    base_schema,
    l2l_rows,
    lanelet_rows,
    register_custom_extractor,
    run_custom_extractor,
    v2l_rows,
    v2v_rows,
    vehicle_rows,
    vtv_rows,
)
from .graph import (
    EdgeStore,
    NodeStore,
    TemporalTrafficGraph,
    TrafficGraph,
    merge_window,
)
from .pipeline import apply_postprocessors
from .scenario import Scenario, derive_state_derivatives

__all__ = ["Simulation", "ExtractionConfig", "TrafficExtractor",
           "TemporalTrafficExtractor", "build_schemas"]


class Simulation:
    """Deterministic replay of the recorded trajectories.

    States are enriched with finite-difference acceleration and yaw rate
    where the recording lacks them, so downstream features never see
    missing kinematics.  The lifetime always covers timestep 0, even for
    scenarios without any vehicles.
    """

    def __init__(self, scenario: Scenario):
        obstacles = {
            oid: derive_state_derivatives(obs, scenario.dt)
            for oid, obs in scenario.obstacles.items()
        }
        self.scenario = Scenario(scenario.id, scenario.dt, scenario.lanelets,
                                 obstacles)

    @property
    def dt(self) -> float:
        return self.scenario.dt

    @property
    def final_timestep(self) -> int:
        return self.scenario.final_timestep

    @property
    def lifetime(self) -> range:
        return range(self.final_timestep + 1)

    def vehicles_at(self, timestep: int) -> list:
        """(obstacle, state) pairs present at `timestep`, id ascending."""
        out = []
        for oid in sorted(self.scenario.obstacles):
            state = self.scenario.obstacles[oid].state_at(timestep)
            if state is not None:
                out.append((self.scenario.obstacles[oid], state))
        return out

    def state_of(self, vehicle_id: int, timestep: int):
        return self.scenario.obstacles[int(vehicle_id)].state_at(timestep)


@dataclass(frozen=True)
class ExtractionConfig:
    """Everything that shapes one extraction run."""

    v2v: V2VDrawerConfig = V2VDrawerConfig()
    vtv: VTVDrawerConfig = VTVDrawerConfig()
    l2l_types: frozenset = ALL_L2L_TYPES
    v2l_strategy: str = "center"
    n_pad: int = DEFAULT_N_PAD
    custom_extractors: tuple = ()
    temporal_custom_extractors: tuple = ()
    postprocessors: tuple = ()
    temporal_postprocessors: tuple = ()
    cache_size: int = 1

    def __post_init__(self):
        problems = []
        if self.cache_size < 1:
            problems.append(f"cache size must be >= 1, got {self.cache_size}")
        if self.n_pad < 2:
            problems.append(f"n_pad must be >= 2, got {self.n_pad}")
        if self.v2l_strategy not in ("center", "shape"):
            problems.append(
                f"unknown vehicle-to-lanelet strategy {self.v2l_strategy!r}"
            )
        unknown = frozenset(self.l2l_types) - ALL_L2L_TYPES
        if unknown:
            problems.append(f"unknown lanelet relation types {sorted(unknown)}")
        if (self.vtv.t_max is not None and self.cache_size > 1
                and self.vtv.t_max > self.cache_size - 1):
            problems.append(
                f"temporal horizon t_max={self.vtv.t_max} exceeds cache "
                f"size {self.cache_size} minus one"
            )
        for ex in self.temporal_custom_extractors:
            if ex.store != "vtv":
                problems.append(
                    f"temporal extractor {ex.name!r} must target the vtv "
                    f"store, not {ex.store!r}"
                )
        if problems:
            raise ConfigError("; ".join(problems), problems=problems)

    @property
    def effective_t_max(self) -> int:
        """Horizon in steps; defaults to spanning the whole cache."""
        if self.vtv.t_max is not None:
            return self.vtv.t_max
        return max(self.cache_size - 1, 1)


def build_schemas(config: ExtractionConfig) -> Tuple[dict, tuple]:
    schema = base_schema(config.n_pad)
    for ex in config.custom_extractors:
        schema = register_custom_extractor(schema, ex)
    for ex in config.temporal_custom_extractors:
        schema = register_custom_extractor(schema, ex)
    vtv_channels = schema.pop("vtv")
    return schema, vtv_channels


class TrafficExtractor:
    """Stateless single-timestep extraction over one simulation."""

    def __init__(self, simulation: Simulation, config: ExtractionConfig):
        self.simulation = simulation
        self.config = config
        self.schema, self.vtv_channels = build_schemas(config)
        scenario = simulation.scenario
        self._lanelet_ids = sorted(scenario.lanelets)
        self._lanelets = [scenario.lanelets[i] for i in self._lanelet_ids]
        self._l_row = {lid: i for i, lid in enumerate(self._lanelet_ids)}

        # The map is static: lanelet features and relations are computed
        # once and shared by every timestep of the scenario.
        l_x, l_counts = lanelet_rows(self._lanelets, config.n_pad)
        self._l_x = l_x
        self._l_counts = l_counts
        self._l2l_edges = build_l2l_edges(scenario, config.l2l_types)
        self._l2l_x = l2l_rows(
            [e.as_record() for e in self._l2l_edges], scenario.lanelets
        )
        if self._l2l_edges:
            self._l2l_index = np.array(
                [(self._l_row[e.source], self._l_row[e.target])
                 for e in self._l2l_edges], np.int64,
            ).T
        else:
            self._l2l_index = np.empty((2, 0), np.int64)

    def extract(self, timestep: int) -> TrafficGraph:
        sim = self.simulation
        if timestep not in sim.lifetime:
            raise ExtractionError(
                f"timestep {timestep} outside scenario lifetime "
                f"[0, {sim.final_timestep}]"
            )
        config = self.config
        scenario = sim.scenario
        vehicles = sim.vehicles_at(timestep)
        vehicle_ids = [obs.id for obs, _ in vehicles]
        v_row = {vid: i for i, vid in enumerate(vehicle_ids)}
        state_of = {obs.id: state for obs, state in vehicles}

        v2v_pairs = draw_v2v(
            [(obs.id, state.position) for obs, state in vehicles], config.v2v
        )
        v2l_pairs = build_v2l_edges(vehicles, scenario.lanelets,
                                    config.v2l_strategy)
        l2v_pairs = mirror_v2l_edges(v2l_pairs)

        v_x = vehicle_rows(vehicles)
        v2v_x = v2v_rows([(state_of[a], state_of[b]) for a, b in v2v_pairs])
        v2l_x = v2l_rows(
            [(state_of[v], scenario.lanelets[l]) for v, l in v2l_pairs]
        )
        l2v_x = v2l_x.copy()

        edge_ids = {"l2l": [e.as_record() for e in self._l2l_edges],
                    "v2v": v2v_pairs, "v2l": v2l_pairs, "l2v": l2v_pairs}
        context = FeatureContext(
            scenario_id=scenario.id, timestep=timestep, dt=sim.dt,
            vehicles=vehicles, lanelets=self._lanelets, edges=edge_ids,
        )
        base_x = {"v": v_x, "l": self._l_x, "l2l": self._l2l_x,
                  "v2v": v2v_x, "v2l": v2l_x, "l2v": l2v_x}
        for ex in self.config.custom_extractors:
            extra = run_custom_extractor(ex, context, len(base_x[ex.store]))
            base_x[ex.store] = np.hstack([base_x[ex.store], extra])

        nodes = {
            "v": NodeStore("v", np.array(vehicle_ids, np.int64).reshape(-1),
                           base_x["v"], self.schema["v"]),
            "l": NodeStore("l", np.array(self._lanelet_ids, np.int64),
                           base_x["l"], self.schema["l"],
                           metadata={"num_vertices": self._l_counts}),
        }

        def edge_store(relation, pairs, row_of_src, row_of_dst):
            if pairs:
                index = np.array(
                    [(row_of_src[a], row_of_dst[b]) for a, b in pairs],
                    np.int64,
                ).T
            else:
                index = np.empty((2, 0), np.int64)
            return EdgeStore(relation, index, base_x[relation],
                             self.schema[relation])

        edges = {
            "l2l": EdgeStore("l2l", self._l2l_index, base_x["l2l"],
                             self.schema["l2l"]),
            "v2v": edge_store("v2v", v2v_pairs, v_row, v_row),
            "v2l": edge_store("v2l", v2l_pairs, v_row, self._l_row),
            "l2v": edge_store("l2v", l2v_pairs, self._l_row, v_row),
        }
        graph = TrafficGraph(scenario.id, timestep, sim.dt, nodes, edges)
        return apply_postprocessors(config.postprocessors, graph)


class TemporalTrafficExtractor:
    """Stateful windowed extraction; call with strictly increasing t."""

    def __init__(self, simulation: Simulation, config: ExtractionConfig):
        self.inner = TrafficExtractor(simulation, config)
        self.config = config
        self._cache: deque = deque(maxlen=config.cache_size)
        self._last_timestep: Optional[int] = None

    @property
    def window_size(self) -> int:
        return len(self._cache)

    def extract(self, timestep: int) -> TemporalTrafficGraph:
        if self._last_timestep is not None and timestep <= self._last_timestep:
            raise ExtractionError(
                f"temporal extraction must advance monotonically; got "
                f"t={timestep} after t={self._last_timestep}"
            )
        graph = self.inner.extract(timestep)
        self._last_timestep = timestep
        self._cache.append(graph)

        merged = merge_window(list(self._cache),
                              vtv_channels=self.inner.vtv_channels)
        v_store = merged.nodes["v"]
        keys = [v_store.key_of(i) for i in range(len(v_store))]
        pairs = draw_vtv_pairs(keys, self.config.effective_t_max)

        sim = self.inner.simulation
        state_pairs = [
            (sim.state_of(*old), sim.state_of(*new)) for old, new in pairs
        ]
        vtv_x = vtv_rows(state_pairs, sim.dt)
        if self.config.temporal_custom_extractors:
            context = FeatureContext(
                scenario_id=merged.scenario_id, timestep=timestep, dt=sim.dt,
                vehicles=[
                    (sim.scenario.obstacles[vid], sim.state_of(vid, t))
                    for vid, t in keys
                ],
                lanelets=self.inner._lanelets,
                edges={"vtv": pairs},
            )
            for ex in self.config.temporal_custom_extractors:
                extra = run_custom_extractor(ex, context, len(pairs))
                vtv_x = np.hstack([vtv_x, extra])
        if pairs:
            index = np.array(
                [(v_store.index_of(old), v_store.index_of(new))
                 for old, new in pairs], np.int64,
            ).T
        else:
            index = np.empty((2, 0), np.int64)
        merged = merged.replace_edges(
            vtv=EdgeStore("vtv", index, vtv_x, self.inner.vtv_channels)
        )
        return apply_postprocessors(self.config.temporal_postprocessors,
                                    merged)
